// SPDX-License-Identifier: Apache-2.0
//
// JSON forms of the pipeline artifacts (see docs/). Keys are emitted in
// sorted order, so parse + dump reproduces an emitted document byte for byte.

#pragma once

#include <nlohmann/json.hpp>

#include "mcfl/instrumenter.hpp"
#include "mcfl/linemap.hpp"
#include "mcfl/localizer.hpp"
#include "mcfl/schedule.hpp"
#include "mcfl/verifier.hpp"

namespace mcfl {

using Json = nlohmann::json;

Json to_json(const Counterexample& cex);
Counterexample counterexample_from_json(const Json& j);

Json to_json(const Schedule& s);
Schedule schedule_from_json(const Json& j);

Json to_json(const LineMap& m);
LineMap line_map_from_json(const Json& j);

Json to_json(const InstrumentedProgram& ip);  // sidecar: domain, blocked, sites

Json to_json(const DiagnosisReport& r);

std::string dump(const Json& j);  // 2-space indent, trailing newline

}  // namespace mcfl
