#include "potwell/serialize.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "potwell/error.hpp"
#include "potwell/format.hpp"

namespace potwell {

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t lineno, std::size_t expected) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) comma = line.size();
    const auto v = parse_double(trim(std::string_view(line).substr(start, comma - start)));
    if (!v) throw ParseError(lineno, "bad number");
    out.push_back(*v);
    start = comma + 1;
  }
  if (out.size() != expected)
    throw ParseError(lineno, "expected " + std::to_string(expected) + " fields");
  return out;
}

}  // namespace

Json to_json(const FitResult& fit) {
  return Json{{"q", fit.q},
              {"phi", fit.phi},
              {"sigma2", fit.sigma2()},
              {"alpha", std::vector<double>(fit.alpha().begin(), fit.alpha().end())},
              {"log_likelihood", fit.log_likelihood},
              {"aic", fit.aic},
              {"iterations", fit.iterations},
              {"converged", fit.converged}};
}

FitResult fit_from_json(const Json& j) {
  FitResult f;
  f.q = j.at("q").get<int>();
  f.phi = j.at("phi").get<std::vector<double>>();
  f.log_likelihood = j.at("log_likelihood").get<double>();
  f.aic = j.at("aic").get<double>();
  f.iterations = j.at("iterations").get<int>();
  f.converged = j.at("converged").get<bool>();
  if (static_cast<int>(f.phi.size()) != f.q + 1) throw Error("fit JSON: phi length does not match q");
  return f;
}

Json to_json(const ModelSelection& selection) {
  Json fits = Json::array();
  for (const auto& f : selection.fits) fits.push_back(to_json(f));
  Json failures = Json::array();
  for (const auto& f : selection.failures) failures.push_back({{"q", f.q}, {"error", f.reason}});
  return Json{{"fits", fits}, {"failures", failures}, {"chosen_q", selection.chosen}};
}

ModelSelection selection_from_json(const Json& j) {
  ModelSelection s;
  for (const auto& f : j.at("fits")) s.fits.push_back(fit_from_json(f));
  for (const auto& f : j.at("failures"))
    s.failures.push_back({f.at("q").get<int>(), f.at("error").get<std::string>()});
  s.chosen = j.at("chosen_q").get<int>();
  return s;
}

Json to_json(const DriftModel& model) {
  return Json{{"q", model.order()}, {"sigma2", model.sigma2()}, {"alpha", model.alpha()}};
}

Json ensemble_sidecar(const PosteriorEnsemble& e) {
  return Json{{"q", e.q},
              {"walkers", e.walkers},
              {"steps", e.steps},
              {"burn_in", e.burn_in},
              {"thin", e.thin},
              {"stretch", e.stretch},
              {"seed", e.seed},
              {"n_samples", e.size()},
              {"acceptance_fraction", e.acceptance_fraction()}};
}

Json to_json(const Diagnostics& d) {
  Json coords = Json::array();
  for (const auto& c : d.coordinates) {
    Json jc{{"mean", c.mean}, {"std", c.std}};
    jc["autocorr_time"] = c.autocorr_time ? Json(*c.autocorr_time) : Json(nullptr);
    jc["autocorr_estimable"] = c.autocorr_time.has_value();
    coords.push_back(jc);
  }
  Json out{{"coordinates", coords}, {"chain_length", d.chain_length}, {"multimodal", d.multimodal}};
  out["mle_outside_68_fraction"] =
      d.mle_outside_fraction ? Json(*d.mle_outside_fraction) : Json(nullptr);
  return out;
}

Json to_json(const TrackEntry& e) {
  Json j{{"window", e.tag.str()}, {"year", e.tag.year}, {"month", e.tag.month}};
  if (e.skipped()) {
    j["label"] = "Skipped";
    j["reason"] = e.skip_reason;
    return j;
  }
  const auto& l = *e.label;
  j["label"] = to_string(l.label);
  j["q"] = l.q;
  j["band"] = {{"evaluated_points", l.band.evaluated_points},
               {"above_zero_fraction", l.band.above_fraction},
               {"below_zero_fraction", l.band.below_fraction}};
  j["well_price"] = l.well_price ? Json(*l.well_price) : Json(nullptr);
  return j;
}

void write_ensemble_csv(std::ostream& out, const PosteriorEnsemble& e) {
  out << "walker,step,sigma2";
  for (int i = 1; i <= e.q; ++i) out << ",alpha" << i;
  out << '\n';
  for (std::size_t i = 0; i < e.size(); ++i) {
    out << e.chain.walker[i] << ',' << e.chain.step[i];
    for (double v : e.draw(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

PosteriorEnsemble read_ensemble_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw EmptyInput("empty ensemble file");
  const auto header = std::string(trim(line));
  int q = 0;
  while (header.find("alpha" + std::to_string(q + 1)) != std::string::npos) ++q;
  if (header.rfind("walker,step,sigma2", 0) != 0 || q < 1)
    throw ParseError(lineno, "expected header walker,step,sigma2,alpha1..");
  PosteriorEnsemble e;
  e.q = q;
  e.chain.dim = q + 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto row = parse_row(line, lineno, static_cast<std::size_t>(q) + 3);
    e.chain.walker.push_back(static_cast<int>(row[0]));
    e.chain.step.push_back(static_cast<int>(row[1]));
    e.chain.values.insert(e.chain.values.end(), row.begin() + 2, row.end());
  }
  return e;
}

void write_band_csv(std::ostream& out, const PotentialBand& b) {
  out << "P,V_mle,lo68,hi68,lo95,hi95\n";
  for (std::size_t g = 0; g < b.size(); ++g)
    out << format_double(b.grid[g]) << ',' << format_double(b.v_mle[g]) << ','
        << format_double(b.lo68[g]) << ',' << format_double(b.hi68[g]) << ','
        << format_double(b.lo95[g]) << ',' << format_double(b.hi95[g]) << '\n';
}

PotentialBand read_band_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw EmptyInput("empty band file");
  if (trim(line) != "P,V_mle,lo68,hi68,lo95,hi95")
    throw ParseError(lineno, "expected header P,V_mle,lo68,hi68,lo95,hi95");
  PotentialBand b;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto r = parse_row(line, lineno, 6);
    b.grid.push_back(r[0]);
    b.v_mle.push_back(r[1]);
    b.lo68.push_back(r[2]);
    b.hi68.push_back(r[3]);
    b.lo95.push_back(r[4]);
    b.hi95.push_back(r[5]);
  }
  return b;
}

void write_track_csv(std::ostream& out, const std::vector<TrackEntry>& track) {
  out << "year,month,label,q,well_price\n";
  for (const auto& e : track) {
    out << e.tag.year << ',' << e.tag.month << ',';
    if (e.skipped()) {
      out << "Skipped,,\n";
      continue;
    }
    out << to_string(e.label->label) << ',' << e.label->q << ',';
    if (e.label->well_price) out << format_double(*e.label->well_price);
    out << '\n';
  }
}

void write_long_ensemble_csv(std::ostream& out, const std::vector<Series>& paths) {
  out << "path_id,time,value\n";
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (std::size_t i = 0; i < paths[p].size(); ++i)
      out << p << ',' << format_double(paths[p].times()[i]) << ','
          << format_double(paths[p].values()[i]) << '\n';
}

}  // namespace potwell
