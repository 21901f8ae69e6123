// Copyright 2026 The QFw Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qfw {

enum class Errc {
    syntax_error,
    unsupported_feature,
    validation_error,
    arity_mismatch,
    out_of_range,
    duplicate_id,
    unknown_backend,
    circuit_too_large,
    mid_circuit_unsupported,
    not_implemented,
    no_feasible_backend,
    incompatible_preference,
    shot_mismatch,
    invalid_spec,
    no_device,
    not_held,
    oversubscribed,
    workers_exceed_partition,
    non_convergence,
    unknown_builtin,
    stage_failure,
    invariant_violation,
    event_cap_exceeded,
    io_error,
    config_error,
};

constexpr std::string_view errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::syntax_error: return "SyntaxError";
    case Errc::unsupported_feature: return "UnsupportedFeature";
    case Errc::validation_error: return "ValidationError";
    case Errc::arity_mismatch: return "ArityMismatch";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::unknown_backend: return "UnknownBackend";
    case Errc::circuit_too_large: return "CircuitTooLarge";
    case Errc::mid_circuit_unsupported: return "MidCircuitUnsupported";
    case Errc::not_implemented: return "NotImplemented";
    case Errc::no_feasible_backend: return "NoFeasibleBackend";
    case Errc::incompatible_preference: return "IncompatiblePreference";
    case Errc::shot_mismatch: return "ShotMismatch";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::no_device: return "NoDevice";
    case Errc::not_held: return "NotHeld";
    case Errc::oversubscribed: return "Oversubscribed";
    case Errc::workers_exceed_partition: return "WorkersExceedPartition";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::unknown_builtin: return "UnknownBuiltin";
    case Errc::stage_failure: return "StageFailure";
    case Errc::invariant_violation: return "InvariantViolation";
    case Errc::event_cap_exceeded: return "EventCapExceeded";
    case Errc::io_error: return "IoError";
    case Errc::config_error: return "ConfigError";
    }
    return "Unknown";
}

/// 1-based position in a source text.
struct SourcePos {
    std::size_t line = 1;
    std::size_t column = 1;
    bool operator==(const SourcePos&) const = default;
};

/// The single exception type thrown by the framework. Callers dispatch on
/// code(); parse errors additionally carry the offending source position.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), detail_(message)
    {
    }

    Error(Errc code, SourcePos pos, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + " at " + std::to_string(pos.line) + ":" +
                             std::to_string(pos.column) + ": " + message),
          code_(code), pos_(pos), detail_(message)
    {
    }

    Errc code() const noexcept { return code_; }
    const std::optional<SourcePos>& position() const noexcept { return pos_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::optional<SourcePos> pos_;
    std::string detail_;
};

} // namespace qfw
