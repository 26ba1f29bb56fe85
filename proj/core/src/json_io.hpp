#pragma once

// Builders shared by the report writers and the scenario runner.

#include <json.hpp>

#include "obscert/certifier.hpp"
#include "obscert/levy_symbol.hpp"
#include "obscert/simgroup.hpp"
#include "obscert/verify.hpp"

namespace obscert::detail {

using json = nlohmann::ordered_json;

json number(double x);
json to_json(const AdmissibilityReport& rep);
json to_json(const Certificate& cert);
json to_json(const IterationTrace& trace);
json to_json(const VerificationRow& row);
json to_json(const VerificationReport& rep);
json to_json(const LsConstants& ls);
json to_json(const DissipationResult& d, double lambda);

}  // namespace obscert::detail
