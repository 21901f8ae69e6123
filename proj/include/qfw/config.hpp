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

#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qfw/error.hpp"
#include "qfw/qpm.hpp"
#include "qfw/qtm.hpp"
#include "qfw/resman.hpp"
#include "qfw/simenv.hpp"

namespace qfw {

/// Environment variable naming the default configuration file.
inline constexpr const char* config_env_var = "QFW_CONFIG";

struct BackendConfig {
    std::string id;
    qpm::BackendKind kind = qpm::BackendKind::state_vector;
    std::size_t max_qubits = sv::default_max_qubits;
    // state_vector
    double alpha = 1e-3;
    double beta = 1e-9;
    std::size_t concurrency = 64;
    // hardware
    double readout_p = 0.0;
    double alpha_q = 0.0;
    double beta_q = 0.0;
    bool supports_mid_circuit = true;
    bool supports_conditionals = true;
};

struct SimEnvConfig {
    std::optional<std::vector<simenv::PartitionSpec>> partitions;
    simenv::TimingModel timing;
    /// Modeled duration of one classical post-processing step.
    double classical_step_s = 1.0;
};

struct SystemConfig {
    resman::ClusterConfig cluster;
    std::vector<BackendConfig> backends;
    qtm::RoutingConfig routing;
    SimEnvConfig sim;
};

inline SystemConfig default_config()
{
    SystemConfig cfg;
    BackendConfig sv;
    sv.id = "statevec";
    BackendConfig hw;
    hw.id = "mock-hw";
    hw.kind = qpm::BackendKind::hardware;
    hw.max_qubits = 20;
    hw.readout_p = 0.02;
    hw.alpha_q = 2.0;
    hw.beta_q = 1e-5;
    cfg.backends = {sv, hw};
    return cfg;
}

namespace detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& into)
{
    if (j.contains(key))
        into = j.at(key).get<T>();
}

} // namespace detail

inline SystemConfig config_from_json(const nlohmann::json& j)
{
    try {
        SystemConfig cfg = default_config();
        if (j.contains("cluster")) {
            const auto& c = j.at("cluster");
            detail::read_opt(c, "total_nodes", cfg.cluster.total_nodes);
            if (c.contains("single_qc_device")) {
                if (c.at("single_qc_device").is_null())
                    cfg.cluster.single_qc_device.reset();
                else
                    cfg.cluster.single_qc_device = c.at("single_qc_device").get<std::string>();
            }
            detail::read_opt(c, "backfill", cfg.cluster.backfill);
            detail::read_opt(c, "backfill_depth", cfg.cluster.backfill_depth);
            detail::read_opt(c, "max_events", cfg.cluster.max_events);
        }
        if (j.contains("backends")) {
            cfg.backends.clear();
            for (const auto& b : j.at("backends")) {
                BackendConfig bc;
                bc.id = b.at("id").get<std::string>();
                bc.kind = qpm::kind_from_name(b.at("kind").get<std::string>());
                if (bc.kind == qpm::BackendKind::hardware)
                    bc.max_qubits = 20;
                detail::read_opt(b, "max_qubits", bc.max_qubits);
                detail::read_opt(b, "alpha", bc.alpha);
                detail::read_opt(b, "beta", bc.beta);
                detail::read_opt(b, "concurrency", bc.concurrency);
                detail::read_opt(b, "readout_p", bc.readout_p);
                detail::read_opt(b, "alpha_q", bc.alpha_q);
                detail::read_opt(b, "beta_q", bc.beta_q);
                detail::read_opt(b, "supports_mid_circuit", bc.supports_mid_circuit);
                detail::read_opt(b, "supports_conditionals", bc.supports_conditionals);
                cfg.backends.push_back(bc);
            }
        }
        if (j.contains("routing")) {
            const auto& r = j.at("routing");
            detail::read_opt(r, "sv_max", cfg.routing.sv_max);
            detail::read_opt(r, "tn_depth_max", cfg.routing.tn_depth_max);
            detail::read_opt(r, "local_qubits", cfg.routing.local_qubits);
            detail::read_opt(r, "gang_limit", cfg.routing.gang_limit);
        }
        if (j.contains("sim_environment")) {
            const auto& s = j.at("sim_environment");
            detail::read_opt(s, "alpha", cfg.sim.timing.alpha);
            detail::read_opt(s, "beta", cfg.sim.timing.beta);
            detail::read_opt(s, "gamma", cfg.sim.timing.gamma);
            detail::read_opt(s, "classical_step_s", cfg.sim.classical_step_s);
            if (s.contains("partitions") && !s.at("partitions").is_null()) {
                std::vector<simenv::PartitionSpec> parts;
                for (const auto& p : s.at("partitions"))
                    parts.push_back({qpm::kind_from_name(p.at("kind").get<std::string>()), p.at("nodes").get<std::size_t>()});
                cfg.sim.partitions = parts;
            }
        }
        if (cfg.sim.timing.alpha < 0 || cfg.sim.timing.beta < 0 || cfg.sim.timing.gamma < 0)
            throw Error(Errc::config_error, "timing parameters must be non-negative");
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::config_error, e.what());
    }
}

inline nlohmann::ordered_json config_to_json(const SystemConfig& cfg)
{
    nlohmann::ordered_json j;
    j["cluster"] = {{"total_nodes", cfg.cluster.total_nodes},
                    {"single_qc_device", cfg.cluster.single_qc_device ? nlohmann::ordered_json(*cfg.cluster.single_qc_device)
                                                                      : nlohmann::ordered_json(nullptr)},
                    {"backfill", cfg.cluster.backfill},
                    {"backfill_depth", cfg.cluster.backfill_depth},
                    {"max_events", cfg.cluster.max_events}};
    j["backends"] = nlohmann::ordered_json::array();
    for (const auto& b : cfg.backends) {
        nlohmann::ordered_json e{{"id", b.id}, {"kind", qpm::kind_name(b.kind)}, {"max_qubits", b.max_qubits}};
        if (b.kind == qpm::BackendKind::state_vector) {
            e["alpha"] = b.alpha;
            e["beta"] = b.beta;
            e["concurrency"] = b.concurrency;
        } else if (b.kind == qpm::BackendKind::hardware) {
            e["readout_p"] = b.readout_p;
            e["alpha_q"] = b.alpha_q;
            e["beta_q"] = b.beta_q;
            e["supports_mid_circuit"] = b.supports_mid_circuit;
            e["supports_conditionals"] = b.supports_conditionals;
        }
        j["backends"].push_back(e);
    }
    j["routing"] = {{"sv_max", cfg.routing.sv_max},
                    {"tn_depth_max", cfg.routing.tn_depth_max},
                    {"local_qubits", cfg.routing.local_qubits},
                    {"gang_limit", cfg.routing.gang_limit}};
    nlohmann::ordered_json sim{{"alpha", cfg.sim.timing.alpha},
                               {"beta", cfg.sim.timing.beta},
                               {"gamma", cfg.sim.timing.gamma},
                               {"classical_step_s", cfg.sim.classical_step_s}};
    if (cfg.sim.partitions) {
        sim["partitions"] = nlohmann::ordered_json::array();
        for (const auto& p : *cfg.sim.partitions)
            sim["partitions"].push_back({{"kind", qpm::kind_name(p.kind)}, {"nodes", p.nodes}});
    } else {
        sim["partitions"] = nullptr;
    }
    j["sim_environment"] = sim;
    return j;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::io_error, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline SystemConfig load_config(const std::string& path)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::config_error, path + ": " + e.what());
    }
    return config_from_json(j);
}

/// Explicit path, else $QFW_CONFIG, else the built-in defaults.
inline SystemConfig resolve_config(const std::optional<std::string>& path)
{
    if (path)
        return load_config(*path);
    if (const char* env = std::getenv(config_env_var); env && *env)
        return load_config(env);
    return default_config();
}

inline std::shared_ptr<qpm::Backend> make_backend(const BackendConfig& b)
{
    switch (b.kind) {
    case qpm::BackendKind::state_vector:
        return std::make_shared<qpm::StateVectorBackend>(
            qpm::StateVectorConfig{b.id, b.max_qubits, b.alpha, b.beta, b.concurrency});
    case qpm::BackendKind::hardware:
        return std::make_shared<qpm::MockHardwareBackend>(qpm::MockHardwareConfig{
            b.id, b.max_qubits, b.readout_p, b.alpha_q, b.beta_q, b.supports_mid_circuit, b.supports_conditionals});
    case qpm::BackendKind::tensor_network: return std::make_shared<qpm::TensorNetworkBackend>(b.id, b.max_qubits);
    }
    throw Error(Errc::config_error, "unknown backend kind");
}

} // namespace qfw
