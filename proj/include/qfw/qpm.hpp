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

#include <algorithm>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "qfw/circuit.hpp"
#include "qfw/error.hpp"
#include "qfw/rng.hpp"
#include "qfw/statevec.hpp"

/// Quantum Platform Manager: the common execution/calibration contract that
/// every platform backend implements, and the registry the task manager
/// routes against.
namespace qfw::qpm {

enum class BackendKind { state_vector, tensor_network, hardware };

constexpr std::string_view kind_name(BackendKind k) noexcept
{
    switch (k) {
    case BackendKind::state_vector: return "state_vector";
    case BackendKind::tensor_network: return "tensor_network";
    case BackendKind::hardware: return "hardware";
    }
    return "?";
}

inline BackendKind kind_from_name(std::string_view s)
{
    for (auto k : {BackendKind::state_vector, BackendKind::tensor_network, BackendKind::hardware})
        if (kind_name(k) == s)
            return k;
    throw Error(Errc::config_error, "unknown backend kind '" + std::string(s) + "'");
}

constexpr bool is_simulator(BackendKind k) noexcept { return k != BackendKind::hardware; }

struct BackendDescriptor {
    std::string id;
    BackendKind kind = BackendKind::state_vector;
    std::size_t max_qubits = 0;
    bool supports_mid_circuit = true;
    bool supports_conditionals = true;
    /// Maximum simultaneous requests; always 1 for hardware.
    std::size_t concurrency = 1;
    bool operator==(const BackendDescriptor&) const = default;
};

struct CalibrationInfo {
    double readout_flip_probability = 0.0;
    double alpha_q = 0.0; // fixed overhead, seconds
    double beta_q = 0.0;  // seconds per shot*gate
    std::uint64_t captured_at = 0;
};

struct ExecuteRequest {
    std::string task_id;
    Circuit circuit;
    std::uint64_t shots = 1;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    double submitted_at = 0.0;
};

struct ExecuteResult {
    std::string task_id;
    sv::Counts counts;
    sv::ExecutionTrace trace;
    std::string backend_id;
    double modeled_service_time = 0.0;
    double queue_wait = 0.0;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual const BackendDescriptor& descriptor() const = 0;
    virtual CalibrationInfo calibration() const = 0;
    virtual ExecuteResult execute(const ExecuteRequest& req) = 0;
};

/// Throws if the circuit cannot run on a backend with this descriptor.
inline void check_fits(const BackendDescriptor& d, const Circuit& c)
{
    if (c.num_qubits > d.max_qubits)
        throw Error(Errc::circuit_too_large, std::to_string(c.num_qubits) + " qubits exceeds backend '" + d.id +
                                                 "' limit of " + std::to_string(d.max_qubits));
    if (!d.supports_mid_circuit && has_mid_circuit_operations(c))
        throw Error(Errc::mid_circuit_unsupported, "backend '" + d.id + "' does not support mid-circuit measurement");
    if (!d.supports_conditionals && has_conditionals(c))
        throw Error(Errc::mid_circuit_unsupported, "backend '" + d.id + "' does not support conditional operations");
}

inline void check_request(const ExecuteRequest& req)
{
    if (req.shots == 0)
        throw Error(Errc::out_of_range, "shots must be positive");
    if (req.workers == 0)
        throw Error(Errc::out_of_range, "workers must be positive");
}

// ---------------------------------------------------------------------------
// State-vector backend
// ---------------------------------------------------------------------------

struct StateVectorConfig {
    std::string id = "statevec";
    std::size_t max_qubits = sv::default_max_qubits;
    double alpha = 1e-3;
    double beta = 1e-9;
    std::size_t concurrency = 64;
};

class StateVectorBackend final : public Backend {
public:
    explicit StateVectorBackend(StateVectorConfig cfg = {})
        : cfg_(std::move(cfg)),
          desc_{cfg_.id, BackendKind::state_vector, cfg_.max_qubits, true, true, std::max<std::size_t>(cfg_.concurrency, 1)}
    {
    }

    const BackendDescriptor& descriptor() const override { return desc_; }
    CalibrationInfo calibration() const override { return {}; }

    /// alpha + beta * gates * 2^n / w
    double service_time(const Circuit& c, std::size_t workers) const
    {
        return cfg_.alpha + cfg_.beta * static_cast<double>(gate_count(c)) *
                                std::ldexp(1.0, static_cast<int>(c.num_qubits)) / static_cast<double>(workers);
    }

    ExecuteResult execute(const ExecuteRequest& req) override
    {
        check_request(req);
        check_fits(desc_, req.circuit);
        auto r = sv::run(req.circuit, req.shots, req.seed, req.workers, cfg_.max_qubits);
        return {req.task_id, std::move(r.counts), r.trace, desc_.id, service_time(req.circuit, req.workers), 0.0};
    }

private:
    StateVectorConfig cfg_;
    BackendDescriptor desc_;
};

// ---------------------------------------------------------------------------
// Mock hardware
// ---------------------------------------------------------------------------

struct MockHardwareConfig {
    std::string id = "mock-hw";
    std::size_t max_qubits = 20;
    double readout_p = 0.02;
    double alpha_q = 2.0;
    double beta_q = 1e-5;
    bool supports_mid_circuit = true;
    bool supports_conditionals = true;
};

/// Flips each output bit of each shot independently with probability p.
/// Shots are enumerated in sorted-key order; shot i, bit j draws from
/// derive_seed(seed, {readout, i, j}).
inline sv::Counts apply_readout_noise(const sv::Counts& ideal, double p, std::uint64_t seed)
{
    if (p <= 0.0)
        return ideal;
    sv::Counts noisy;
    noisy.shots = ideal.shots;
    std::uint64_t shot = 0;
    for (const auto& [key, k] : ideal.table)
        for (std::uint64_t rep = 0; rep < k; ++rep, ++shot) {
            std::string out = key;
            std::uint64_t bit = 0;
            for (char& ch : out) {
                if (ch == ' ')
                    continue;
                const double u =
                    static_cast<double>(derive_seed(seed, {stream::readout, shot, bit}) >> 11) * 0x1.0p-53;
                if (u < p)
                    ch = ch == '0' ? '1' : '0';
                ++bit;
            }
            ++noisy.table[out];
        }
    return noisy;
}

/// A single physical device: ideal simulation followed by readout flips,
/// serviced one request at a time on a logical timeline.
class MockHardwareBackend final : public Backend {
public:
    explicit MockHardwareBackend(MockHardwareConfig cfg = {})
        : cfg_(std::move(cfg)),
          desc_{cfg_.id, BackendKind::hardware, cfg_.max_qubits, cfg_.supports_mid_circuit, cfg_.supports_conditionals, 1}
    {
        if (cfg_.readout_p < 0.0 || cfg_.readout_p > 1.0 || cfg_.alpha_q < 0.0 || cfg_.beta_q < 0.0)
            throw Error(Errc::config_error, "mock hardware calibration out of range");
    }

    const BackendDescriptor& descriptor() const override { return desc_; }
    CalibrationInfo calibration() const override { return {cfg_.readout_p, cfg_.alpha_q, cfg_.beta_q, 0}; }

    double service_time(const Circuit& c, std::uint64_t shots) const
    {
        return cfg_.alpha_q + cfg_.beta_q * static_cast<double>(shots) * static_cast<double>(gate_count(c));
    }

    ExecuteResult execute(const ExecuteRequest& req) override
    {
        check_request(req);
        check_fits(desc_, req.circuit);
        auto r = sv::run(req.circuit, req.shots, req.seed, 1, cfg_.max_qubits);
        ExecuteResult out{req.task_id, apply_readout_noise(r.counts, cfg_.readout_p, req.seed), r.trace, desc_.id,
                          service_time(req.circuit, req.shots), 0.0};
        std::lock_guard lock(mu_);
        const double start = std::max(req.submitted_at, busy_until_);
        out.queue_wait = start - req.submitted_at;
        busy_until_ = start + out.modeled_service_time;
        return out;
    }

    /// End of the last serviced interval on the device timeline.
    double busy_until() const
    {
        std::lock_guard lock(mu_);
        return busy_until_;
    }

private:
    MockHardwareConfig cfg_;
    BackendDescriptor desc_;
    mutable std::mutex mu_;
    double busy_until_ = 0.0;
};

// ---------------------------------------------------------------------------
// Tensor-network slot
// ---------------------------------------------------------------------------

/// Routable descriptor without a contraction engine; execution needs an
/// externally supplied plugin.
class TensorNetworkBackend final : public Backend {
public:
    using Plugin = std::function<ExecuteResult(const ExecuteRequest&)>;

    TensorNetworkBackend(std::string id, std::size_t max_qubits, Plugin plugin = {})
        : desc_{std::move(id), BackendKind::tensor_network, max_qubits, false, false, 1}, plugin_(std::move(plugin))
    {
    }

    const BackendDescriptor& descriptor() const override { return desc_; }
    CalibrationInfo calibration() const override { return {}; }

    ExecuteResult execute(const ExecuteRequest& req) override
    {
        if (!plugin_)
            throw Error(Errc::not_implemented, "tensor-network backend '" + desc_.id + "' has no engine plugin");
        check_request(req);
        check_fits(desc_, req.circuit);
        auto out = plugin_(req);
        out.backend_id = desc_.id;
        return out;
    }

private:
    BackendDescriptor desc_;
    Plugin plugin_;
};

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

class Registry {
public:
    void register_backend(std::shared_ptr<Backend> backend)
    {
        std::unique_lock lock(mu_);
        const auto& id = backend->descriptor().id;
        for (const auto& b : backends_)
            if (b->descriptor().id == id)
                throw Error(Errc::duplicate_id, "backend '" + id + "' already registered");
        backends_.push_back(std::move(backend));
    }

    /// Registration order.
    std::vector<BackendDescriptor> list_backends() const
    {
        std::shared_lock lock(mu_);
        std::vector<BackendDescriptor> out;
        for (const auto& b : backends_)
            out.push_back(b->descriptor());
        return out;
    }

    bool empty() const
    {
        std::shared_lock lock(mu_);
        return backends_.empty();
    }

    std::shared_ptr<Backend> find(std::string_view id) const
    {
        std::shared_lock lock(mu_);
        for (const auto& b : backends_)
            if (b->descriptor().id == id)
                return b;
        return nullptr;
    }

    std::shared_ptr<Backend> get(std::string_view id) const
    {
        auto b = find(id);
        if (!b)
            throw Error(Errc::unknown_backend, "no backend '" + std::string(id) + "'");
        return b;
    }

    CalibrationInfo get_calibration(std::string_view id) const { return get(id)->calibration(); }

    ExecuteResult execute(std::string_view id, const ExecuteRequest& req) const { return get(id)->execute(req); }

private:
    mutable std::shared_mutex mu_;
    std::vector<std::shared_ptr<Backend>> backends_;
};

} // namespace qfw::qpm
