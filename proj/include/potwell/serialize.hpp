#pragma once

#include <iosfwd>
#include <json.hpp>
#include <vector>

#include "potwell/inference.hpp"
#include "potwell/mcmc.hpp"
#include "potwell/regimes.hpp"
#include "potwell/simulate.hpp"

namespace potwell {

using Json = nlohmann::json;

// JSON documents. Doubles are written in shortest round-trip form.

Json to_json(const FitResult& fit);
FitResult fit_from_json(const Json& j);

Json to_json(const ModelSelection& selection);
ModelSelection selection_from_json(const Json& j);

Json to_json(const DriftModel& model);

/// Sampler configuration and run metadata (the ensemble CSV sidecar).
Json ensemble_sidecar(const PosteriorEnsemble& ensemble);

Json to_json(const Diagnostics& diag);

Json to_json(const TrackEntry& entry);

// CSV products.

/// `walker,step,sigma2,alpha1..alphaq`
void write_ensemble_csv(std::ostream& out, const PosteriorEnsemble& ensemble);
/// Reads the draws back; run metadata other than q is left at defaults.
PosteriorEnsemble read_ensemble_csv(std::istream& in);

/// `P,V_mle,lo68,hi68,lo95,hi95`
void write_band_csv(std::ostream& out, const PotentialBand& band);
PotentialBand read_band_csv(std::istream& in);

/// `year,month,label,q,well_price`; skipped windows carry label Skipped and
/// an empty q.
void write_track_csv(std::ostream& out, const std::vector<TrackEntry>& track);

/// `path_id,time,value`
void write_long_ensemble_csv(std::ostream& out, const std::vector<Series>& paths);

}  // namespace potwell
