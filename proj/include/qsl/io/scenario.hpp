// Copyright 2026 The qsl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsl/core.hpp"
#include "qsl/qstate.hpp"

namespace qsl::io {

/// Malformed or inconsistent configuration.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

enum class ChannelKindId { Unitary, AmplitudeDamping, JaynesCummings, Dephasing, NQubitDephasing };
enum class BoundKind { General, MT, ML, Alpha, MedianWeak, MedianStrong, ChannelClosedForm };
enum class QfiChoice { Sld, CqRaw, CqMin };
enum class Spacing { Linear, Log };

struct TimeGrid {
    double start = 0.0;
    double stop = 1.0;
    int samples = 2;
    Spacing spacing = Spacing::Linear;

    std::vector<double> points() const {
        std::vector<double> out(samples);
        for (int k = 0; k < samples; ++k) {
            const double f = static_cast<double>(k) / (samples - 1);
            out[k] = spacing == Spacing::Linear
                         ? start + (stop - start) * f
                         : std::exp(std::log(start) + (std::log(stop) - std::log(start)) * f);
        }
        out.back() = stop;
        return out;
    }
};

struct ChannelConfig {
    ChannelKindId kind = ChannelKindId::Unitary;
    double gamma = 0.0;
    double omega0 = 0.0;
    double g = 0.0;
    int n = 1;
    std::optional<ComplexMatrix> hamiltonian;  // unitary only
};

/// Exactly one of the alternatives is set.
struct StateConfig {
    std::string preset;                      // excited, ground, plus, ghz, product_plus
    std::optional<std::pair<double, double>> bloch;  // (theta, phi), product over n qubits
    std::optional<double> delta_z;           // qubit with this dZ, upper hemisphere
    std::optional<ComplexVector> amplitudes;
    std::optional<int> random_rank;
};

enum class SweepParam { N, R };
enum class SweepState { Ghz, Separable };

struct SweepConfig {
    SweepParam parameter = SweepParam::N;
    std::vector<double> values;
    SweepState state = SweepState::Ghz;
    double distance = 0.0;  // Bures angle target
    int n = 1;              // fixed when sweeping r
    double r = 1.0;         // fixed when sweeping N
    double gamma = 1.0;
    double mean_z = 0.0;    // separable states only
};

struct Scenario {
    std::string name;
    std::optional<ChannelConfig> channel;
    std::optional<StateConfig> initial_state;
    std::optional<TimeGrid> time_grid;
    BoundKind bound = BoundKind::General;
    QfiChoice qfi_source = QfiChoice::Sld;
    std::optional<SweepConfig> sweep;
    std::string csv_path;
    std::string svg_path;
    double saturation_tol = 1e-6;
    std::uint64_t seed = 0;
};

namespace detail {

inline void only_keys(const json& j, const std::string& where,
                      std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        throw config_error(where + ": expected an object");
    }
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            ok = ok || item.key() == a;
        }
        if (!ok) {
            throw config_error(where + ": unknown key \"" + item.key() + "\"");
        }
    }
}

inline double get_number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) {
        throw config_error(where + ": missing \"" + key + "\"");
    }
    const auto& v = j.at(key);
    if (!v.is_number()) {
        throw config_error(where + "." + key + ": expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw config_error(where + "." + key + ": not finite");
    }
    return x;
}

inline double number_or(const json& j, const char* key, const std::string& where, double dflt) {
    return j.contains(key) ? get_number(j, key, where) : dflt;
}

inline int get_int(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number_integer()) {
        throw config_error(where + ": \"" + key + "\" must be an integer");
    }
    return j.at(key).get<int>();
}

inline std::string get_string(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw config_error(where + ": \"" + key + "\" must be a string");
    }
    return j.at(key).get<std::string>();
}

// A complex number as a JSON number or a [re, im] pair.
inline cplx get_complex(const json& v, const std::string& where) {
    if (v.is_number()) {
        return {v.get<double>(), 0.0};
    }
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
    }
    throw config_error(where + ": expected a number or [re, im]");
}

inline ComplexMatrix parse_hamiltonian(const json& j, const std::string& where) {
    only_keys(j, where, {"diagonal", "pauli", "matrix"});
    if (j.size() != 1) {
        throw config_error(where + ": give exactly one of diagonal, pauli, matrix");
    }
    if (j.contains("diagonal")) {
        const auto& d = j.at("diagonal");
        if (!d.is_array() || d.empty()) {
            throw config_error(where + ".diagonal: expected a nonempty array");
        }
        ComplexMatrix h = ComplexMatrix::Zero(d.size(), d.size());
        for (std::size_t k = 0; k < d.size(); ++k) {
            if (!d[k].is_number()) {
                throw config_error(where + ".diagonal: expected numbers");
            }
            h(k, k) = d[k].get<double>();
        }
        return h;
    }
    if (j.contains("pauli")) {
        const auto& p = j.at("pauli");
        const std::string w = where + ".pauli";
        only_keys(p, w, {"x", "y", "z"});
        return number_or(p, "x", w, 0.0) * pauli_x() + number_or(p, "y", w, 0.0) * pauli_y() +
               number_or(p, "z", w, 0.0) * pauli_z();
    }
    const auto& m = j.at("matrix");
    if (!m.is_array() || m.empty()) {
        throw config_error(where + ".matrix: expected rows");
    }
    const auto d = static_cast<Eigen::Index>(m.size());
    ComplexMatrix h(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        if (!m[r].is_array() || static_cast<Eigen::Index>(m[r].size()) != d) {
            throw config_error(where + ".matrix: expected a square matrix");
        }
        for (Eigen::Index c = 0; c < d; ++c) {
            h(r, c) = get_complex(m[r][c], where + ".matrix");
        }
    }
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
        throw config_error(where + ".matrix: not Hermitian");
    }
    return h;
}

inline ChannelConfig parse_channel(const json& j) {
    const std::string w = "channel";
    only_keys(j, w, {"kind", "gamma", "omega0", "r", "g", "n", "hamiltonian"});
    ChannelConfig c;
    const std::string kind = get_string(j, "kind", w);
    auto rates = [&] {
        c.gamma = get_number(j, "gamma", w);
        if (j.contains("r") && j.contains("omega0")) {
            throw config_error(w + ": give omega0 or r, not both");
        }
        c.omega0 = j.contains("r") ? get_number(j, "r", w) * c.gamma : get_number(j, "omega0", w);
    };
    if (kind == "unitary") {
        c.kind = ChannelKindId::Unitary;
        if (!j.contains("hamiltonian")) {
            throw config_error(w + ": unitary channel needs \"hamiltonian\"");
        }
        c.hamiltonian = parse_hamiltonian(j.at("hamiltonian"), w + ".hamiltonian");
    } else if (kind == "amplitude_damping") {
        c.kind = ChannelKindId::AmplitudeDamping;
        c.gamma = get_number(j, "gamma", w);
    } else if (kind == "jaynes_cummings") {
        c.kind = ChannelKindId::JaynesCummings;
        c.g = get_number(j, "g", w);
    } else if (kind == "dephasing") {
        c.kind = ChannelKindId::Dephasing;
        rates();
    } else if (kind == "nqubit_dephasing") {
        c.kind = ChannelKindId::NQubitDephasing;
        rates();
        c.n = get_int(j, "n", w);
    } else {
        throw config_error(w + ": unknown kind \"" + kind + "\"");
    }
    if (kind != "unitary" && j.contains("hamiltonian")) {
        throw config_error(w + ": \"hamiltonian\" only applies to the unitary channel");
    }
    return c;
}

inline StateConfig parse_state(const json& j) {
    const std::string w = "initial_state";
    only_keys(j, w, {"preset", "bloch", "delta_z", "amplitudes", "populations", "random"});
    if (j.size() != 1) {
        throw config_error(w + ": give exactly one state description");
    }
    StateConfig s;
    if (j.contains("preset")) {
        s.preset = get_string(j, "preset", w);
        static const char* known[] = {"excited", "ground", "plus", "ghz", "product_plus"};
        bool ok = false;
        for (const char* k : known) {
            ok = ok || s.preset == k;
        }
        if (!ok) {
            throw config_error(w + ": unknown preset \"" + s.preset + "\"");
        }
    } else if (j.contains("bloch")) {
        const auto& b = j.at("bloch");
        only_keys(b, w + ".bloch", {"theta", "phi"});
        s.bloch = std::make_pair(get_number(b, "theta", w + ".bloch"),
                                 number_or(b, "phi", w + ".bloch", 0.0));
    } else if (j.contains("delta_z")) {
        s.delta_z = get_number(j, "delta_z", w);
        if (!(*s.delta_z >= 0.0 && *s.delta_z <= 1.0)) {
            throw config_error(w + ".delta_z: must lie in [0, 1]");
        }
    } else if (j.contains("amplitudes") || j.contains("populations")) {
        const bool pops = j.contains("populations");
        const auto& a = pops ? j.at("populations") : j.at("amplitudes");
        if (!a.is_array() || a.size() < 2) {
            throw config_error(w + ": expected at least two entries");
        }
        ComplexVector v(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (pops) {
                if (!a[k].is_number() || a[k].get<double>() < 0.0) {
                    throw config_error(w + ".populations: expected numbers >= 0");
                }
                v(k) = std::sqrt(a[k].get<double>());
            } else {
                v(k) = get_complex(a[k], w + ".amplitudes");
            }
        }
        if (v.norm() == 0.0) {
            throw config_error(w + ": zero vector");
        }
        if (pops && std::abs(v.squaredNorm() - 1.0) > 1e-10) {
            throw config_error(w + ".populations: must sum to 1");
        }
        s.amplitudes = v;
    } else {
        const auto& r = j.at("random");
        only_keys(r, w + ".random", {"rank"});
        s.random_rank = r.contains("rank") ? get_int(r, "rank", w + ".random") : 1;
    }
    return s;
}

inline TimeGrid parse_grid(const json& j) {
    const std::string w = "time_grid";
    only_keys(j, w, {"start", "stop", "samples", "spacing"});
    TimeGrid g;
    g.start = number_or(j, "start", w, 0.0);
    g.stop = get_number(j, "stop", w);
    g.samples = get_int(j, "samples", w);
    const std::string sp = j.contains("spacing") ? get_string(j, "spacing", w) : "linear";
    if (sp == "linear") {
        g.spacing = Spacing::Linear;
    } else if (sp == "log") {
        g.spacing = Spacing::Log;
    } else {
        throw config_error(w + ".spacing: expected linear or log");
    }
    if (g.samples < 2) {
        throw config_error(w + ": samples must be >= 2");
    }
    if (!(g.start >= 0.0) || !(g.stop > g.start)) {
        throw config_error(w + ": need 0 <= start < stop");
    }
    if (g.spacing == Spacing::Log && !(g.start > 0.0)) {
        throw config_error(w + ": log spacing needs start > 0");
    }
    return g;
}

inline SweepConfig parse_sweep(const json& j) {
    const std::string w = "sweep";
    only_keys(j, w,
              {"parameter", "values", "state", "distance", "fidelity", "n", "r", "gamma", "mean_z"});
    SweepConfig s;
    const std::string p = get_string(j, "parameter", w);
    if (p == "n") {
        s.parameter = SweepParam::N;
        s.r = get_number(j, "r", w);
    } else if (p == "r") {
        s.parameter = SweepParam::R;
        s.n = get_int(j, "n", w);
        if (s.n < 1) {
            throw config_error(w + ".n: must be >= 1");
        }
    } else {
        throw config_error(w + ".parameter: expected n or r");
    }
    const auto& v = j.contains("values") ? j.at("values") : json();
    if (!v.is_array() || v.empty()) {
        throw config_error(w + ".values: expected a nonempty array");
    }
    for (const auto& x : v) {
        if (!x.is_number() || !(x.get<double>() > 0.0)) {
            throw config_error(w + ".values: expected positive numbers");
        }
        if (s.parameter == SweepParam::N && !x.is_number_integer()) {
            throw config_error(w + ".values: qubit numbers must be integers");
        }
        s.values.push_back(x.get<double>());
    }
    for (std::size_t k = 1; k < s.values.size(); ++k) {
        if (!(s.values[k] > s.values[k - 1])) {
            throw config_error(w + ".values: must be strictly ascending");
        }
    }
    const std::string st = get_string(j, "state", w);
    if (st == "ghz") {
        s.state = SweepState::Ghz;
    } else if (st == "separable") {
        s.state = SweepState::Separable;
    } else {
        throw config_error(w + ".state: expected ghz or separable");
    }
    if (j.contains("distance") == j.contains("fidelity")) {
        throw config_error(w + ": give exactly one of distance, fidelity");
    }
    if (j.contains("distance")) {
        s.distance = get_number(j, "distance", w);
    } else {
        const double f = get_number(j, "fidelity", w);
        if (!(f >= 0.0 && f < 1.0)) {
            throw config_error(w + ".fidelity: must lie in [0, 1)");
        }
        s.distance = std::acos(std::sqrt(f));
    }
    if (!(s.distance > 0.0 && s.distance <= pi / 2)) {
        throw config_error(w + ": distance must lie in (0, pi/2]");
    }
    s.gamma = number_or(j, "gamma", w, 1.0);
    if (!(s.gamma > 0.0)) {
        throw config_error(w + ".gamma: must be > 0");
    }
    s.mean_z = number_or(j, "mean_z", w, 0.0);
    if (!(std::abs(s.mean_z) < 1.0)) {
        throw config_error(w + ".mean_z: must lie in (-1, 1)");
    }
    if (s.state == SweepState::Ghz && s.mean_z != 0.0) {
        throw config_error(w + ".mean_z: only for separable states");
    }
    return s;
}

template <class E>
E enum_of(const json& j, const char* key, const std::string& where,
          std::initializer_list<std::pair<const char*, E>> table, E dflt) {
    if (!j.contains(key)) {
        return dflt;
    }
    const std::string s = get_string(j, key, where);
    for (const auto& [name, value] : table) {
        if (s == name) {
            return value;
        }
    }
    throw config_error(where + "." + key + ": unknown value \"" + s + "\"");
}

} // namespace detail

inline Scenario parse_scenario(const json& j) {
    using namespace detail;
    only_keys(j, "scenario",
              {"$schema", "name", "channel", "initial_state", "time_grid", "bound", "qfi_source",
               "sweep", "output", "tolerances", "seed"});
    Scenario s;
    if (j.contains("name")) {
        s.name = get_string(j, "name", "scenario");
    }
    if (j.contains("channel")) {
        s.channel = parse_channel(j.at("channel"));
    }
    if (j.contains("initial_state")) {
        s.initial_state = parse_state(j.at("initial_state"));
    }
    if (j.contains("time_grid")) {
        s.time_grid = parse_grid(j.at("time_grid"));
    }
    s.bound = enum_of<BoundKind>(j, "bound", "scenario",
                                 {{"general", BoundKind::General},
                                  {"mt", BoundKind::MT},
                                  {"ml", BoundKind::ML},
                                  {"alpha", BoundKind::Alpha},
                                  {"median_weak", BoundKind::MedianWeak},
                                  {"median_strong", BoundKind::MedianStrong},
                                  {"channel_closed_form", BoundKind::ChannelClosedForm}},
                                 BoundKind::General);
    s.qfi_source = enum_of<QfiChoice>(
        j, "qfi_source", "scenario",
        {{"sld", QfiChoice::Sld}, {"cq_raw", QfiChoice::CqRaw}, {"cq_min", QfiChoice::CqMin}},
        QfiChoice::Sld);
    if (j.contains("sweep")) {
        s.sweep = parse_sweep(j.at("sweep"));
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        only_keys(o, "output", {"csv", "svg"});
        if (o.contains("csv")) {
            s.csv_path = get_string(o, "csv", "output");
        }
        if (o.contains("svg")) {
            s.svg_path = get_string(o, "svg", "output");
        }
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        only_keys(t, "tolerances", {"saturation"});
        s.saturation_tol = number_or(t, "saturation", "tolerances", s.saturation_tol);
        if (!(s.saturation_tol > 0.0)) {
            throw config_error("tolerances.saturation: must be > 0");
        }
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) {
            throw config_error("scenario.seed: expected a nonnegative integer");
        }
        s.seed = j.at("seed").get<std::uint64_t>();
    }
    return s;
}

inline Scenario parse_scenario_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("invalid JSON: ") + e.what());
    }
    return parse_scenario(j);
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw config_error("cannot read " + path);
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_scenario_text(ss.str());
}

} // namespace qsl::io
