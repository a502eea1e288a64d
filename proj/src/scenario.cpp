// JSON scenario loading with strict validation (unknown keys rejected, field
// paths in every error), waveform-to-coefficient resolution, and the
// canonical-form configuration hash embedded in CSV outputs.

#include "cvmdi/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "cvmdi/temporal_mode.hpp"
#include "json.hpp"

namespace cvmdi::experiments {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("scenario: " + path + " " + what);
}

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) {
        fail(path, "must be an object");
    }
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            fail(path.empty() ? "'" + item.key() + "'" : path + ".'" + item.key() + "'",
                 "is not a recognized field");
        }
    }
}

double get_number(const json& j, const std::string& path, const char* key,
                  double fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_number()) {
        fail(path + "." + key, "must be a number");
    }
    return j[key].get<double>();
}

double require_number(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) {
        fail(path + "." + key, "is required");
    }
    if (!j[key].is_number()) {
        fail(path + "." + key, "must be a number");
    }
    return j[key].get<double>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_boolean()) {
        fail(path + "." + key, "must be a boolean");
    }
    return j[key].get<bool>();
}

std::uint64_t get_uint(const json& j, const std::string& path, const char* key,
                       std::uint64_t fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_number_unsigned() && !j[key].is_number_integer()) {
        fail(path + "." + key, "must be a non-negative integer");
    }
    if (j[key].is_number_integer() && j[key].get<std::int64_t>() < 0) {
        fail(path + "." + key, "must be a non-negative integer");
    }
    return j[key].get<std::uint64_t>();
}

std::string require_string(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
        fail(path + "." + key, "must be a string");
    }
    return j[key].get<std::string>();
}

void parse_topology(const json& j, Scenario& s) {
    expect_object(j, "topology");
    const std::string layout = require_string(j, "topology", "layout");
    if (layout == "symmetric") {
        s.topology = Topology::symmetric;
    } else if (layout == "charlie-at-alice") {
        s.topology = Topology::charlie_at_alice;
    } else if (layout == "charlie-at-bob") {
        s.topology = Topology::charlie_at_bob;
    } else if (layout == "explicit") {
        s.topology = Topology::explicit_legs;
    } else {
        fail("topology.layout",
             "must be one of 'symmetric', 'charlie-at-alice', 'charlie-at-bob', "
             "'explicit', got '" +
                 layout + "'");
    }
    if (s.topology == Topology::explicit_legs) {
        check_keys(j, "topology", {"layout", "L_AC_km", "L_BC_km"});
        s.channel.L_AC = require_number(j, "topology", "L_AC_km");
        s.channel.L_BC = require_number(j, "topology", "L_BC_km");
        s.distance_km = s.channel.L_AC + s.channel.L_BC;
    } else {
        check_keys(j, "topology", {"layout", "distance_km"});
        s.distance_km = get_number(j, "topology", "distance_km", 0.0);
    }
}

void parse_matching(const json& j, const std::filesystem::path& base_dir, Scenario& s) {
    expect_object(j, "matching");
    if (j.contains("waveforms")) {
        check_keys(j, "matching", {"waveforms"});
        const json& w = j["waveforms"];
        expect_object(w, "matching.waveforms");
        check_keys(w, "matching.waveforms",
                   {"signal_A", "signal_B", "lo", "omega_lo", "delta_omega_A",
                    "delta_omega_B"});
        WaveformMatching wm;
        wm.signal_A = require_string(w, "matching.waveforms", "signal_A");
        wm.signal_B = require_string(w, "matching.waveforms", "signal_B");
        wm.lo = require_string(w, "matching.waveforms", "lo");
        wm.omega_lo = get_number(w, "matching.waveforms", "omega_lo", 0.0);
        wm.delta_omega_A = get_number(w, "matching.waveforms", "delta_omega_A", 0.0);
        wm.delta_omega_B = get_number(w, "matching.waveforms", "delta_omega_B", 0.0);

        auto resolve = [&](const std::string& rel) {
            const std::filesystem::path p(rel);
            return p.is_absolute() ? p.string() : (base_dir / p).string();
        };
        tm::TemporalMode sig_a = tm::normalize(tm::load_waveform_csv(resolve(wm.signal_A)));
        tm::TemporalMode sig_b = tm::normalize(tm::load_waveform_csv(resolve(wm.signal_B)));
        sig_a.delta_omega = wm.delta_omega_A;
        sig_b.delta_omega = wm.delta_omega_B;
        tm::DetectorMode det;
        det.lo = tm::load_waveform_csv(resolve(wm.lo));
        det.omega_lo = wm.omega_lo;
        const tm::TemporalMode xi = tm::detector_tm(det);
        const double eta_a = tm::mode_match(sig_a, xi);
        const double eta_b = tm::mode_match(sig_b, xi);
        s.matching = protocol::ModeMatchingSet::symmetric(eta_a, eta_b);
        s.waveforms = wm;
        return;
    }
    if (j.contains("eta_A") || j.contains("eta_B")) {
        check_keys(j, "matching", {"eta_A", "eta_B"});
        const double eta_a = get_number(j, "matching", "eta_A", 1.0);
        const double eta_b = get_number(j, "matching", "eta_B", 1.0);
        s.matching = protocol::ModeMatchingSet::symmetric(eta_a, eta_b);
        return;
    }
    check_keys(j, "matching", {"eta_A1", "eta_A2", "eta_B1", "eta_B2"});
    s.matching.eta_A1 = get_number(j, "matching", "eta_A1", 1.0);
    s.matching.eta_A2 = get_number(j, "matching", "eta_A2", 1.0);
    s.matching.eta_B1 = get_number(j, "matching", "eta_B1", 1.0);
    s.matching.eta_B2 = get_number(j, "matching", "eta_B2", 1.0);
}

}  // namespace

std::string to_string(Topology t) {
    switch (t) {
        case Topology::symmetric:
            return "symmetric";
        case Topology::charlie_at_alice:
            return "charlie-at-alice";
        case Topology::charlie_at_bob:
            return "charlie-at-bob";
        case Topology::explicit_legs:
            return "explicit";
    }
    throw std::logic_error("to_string: unknown topology");
}

void Scenario::validate() const {
    channel.validate();
    matching.validate();
    protocol.validate();
    if (finite_size) {
        finite_size->validate();
    }
    if (!(std::isfinite(distance_km) && distance_km >= 0.0)) {
        throw std::invalid_argument("scenario: topology.distance_km must be >= 0");
    }
    if (!(sweep.from_km >= 0.0) || !(sweep.to_km >= sweep.from_km) ||
        !(sweep.step_km > 0.0)) {
        throw std::invalid_argument(
            "scenario: sweep needs 0 <= from_km <= to_km and step_km > 0");
    }
    if (!(grid.eta_min >= 0.0 && grid.eta_max <= 1.0 && grid.eta_min <= grid.eta_max)) {
        throw std::invalid_argument(
            "scenario: grid needs 0 <= eta_min <= eta_max <= 1");
    }
    if (grid.points < 1) {
        throw std::invalid_argument("scenario: grid.points must be >= 1");
    }
    if (grid.points == 1 && grid.eta_min != grid.eta_max) {
        throw std::invalid_argument(
            "scenario: grid.points = 1 requires eta_min == eta_max");
    }
    if (mc.shots == 0) {
        throw std::invalid_argument("scenario: mc.shots must be positive");
    }
    if (noise_curve_eta_B.empty()) {
        throw std::invalid_argument(
            "scenario: excess_noise.eta_B_values must not be empty");
    }
    for (double v : noise_curve_eta_B) {
        if (!(v > 0.0 && v <= 1.0)) {
            throw std::invalid_argument(
                "scenario: excess_noise.eta_B_values entries must lie in (0, 1]");
        }
    }
}

protocol::ChannelParams channel_at(const Scenario& s, double L_km) {
    protocol::ChannelParams ch = s.channel;
    switch (s.topology) {
        case Topology::symmetric:
            ch.L_AC = 0.5 * L_km;
            ch.L_BC = 0.5 * L_km;
            break;
        case Topology::charlie_at_alice:
            ch.L_AC = 0.0;
            ch.L_BC = L_km;
            break;
        case Topology::charlie_at_bob:
            ch.L_AC = L_km;
            ch.L_BC = 0.0;
            break;
        case Topology::explicit_legs:
            break;  // fixed legs; L_km does not apply
    }
    return ch;
}

protocol::ChannelParams channel_at(const Scenario& s) {
    return channel_at(s, s.distance_km);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("scenario: cannot open '" + path + "'");
    }
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("scenario: '" + path + "' is not valid JSON: " +
                                    e.what());
    }
    expect_object(root, "(root)");
    check_keys(root, "",
               {"topology", "channel", "protocol", "matching", "finite_size", "sweep",
                "grid", "mc", "excess_noise"});

    Scenario s;
    if (!root.contains("topology")) {
        fail("topology", "is required");
    }
    parse_topology(root["topology"], s);

    if (root.contains("channel")) {
        const json& j = root["channel"];
        expect_object(j, "channel");
        check_keys(j, "channel", {"alpha_db_per_km", "eps_A", "eps_B", "eps_det"});
        s.channel.alpha = get_number(j, "channel", "alpha_db_per_km", s.channel.alpha);
        s.channel.eps_A = get_number(j, "channel", "eps_A", 0.0);
        s.channel.eps_B = get_number(j, "channel", "eps_B", 0.0);
        s.channel.eps_det =
            get_number(j, "channel", "eps_det", protocol::k_default_relay_detection_noise);
    }
    if (root.contains("protocol")) {
        const json& j = root["protocol"];
        expect_object(j, "protocol");
        check_keys(j, "protocol", {"V_A", "V_B", "beta"});
        s.protocol.V_A = get_number(j, "protocol", "V_A", s.protocol.V_A);
        s.protocol.V_B = get_number(j, "protocol", "V_B", s.protocol.V_B);
        s.protocol.beta_R = get_number(j, "protocol", "beta", s.protocol.beta_R);
    }
    if (root.contains("matching")) {
        const std::filesystem::path base =
            std::filesystem::path(path).parent_path();
        parse_matching(root["matching"], base, s);
    }
    if (root.contains("finite_size")) {
        const json& j = root["finite_size"];
        expect_object(j, "finite_size");
        check_keys(j, "finite_size",
                   {"N", "m", "eps_bar", "eps_PA", "eps_PE", "dim_HX", "use_upper_tB"});
        keyrate::FiniteSizeParams fs;
        fs.N = get_number(j, "finite_size", "N", fs.N);
        fs.m = get_number(j, "finite_size", "m", 0.5 * fs.N);
        fs.eps_bar = get_number(j, "finite_size", "eps_bar", fs.eps_bar);
        fs.eps_PA = get_number(j, "finite_size", "eps_PA", fs.eps_PA);
        fs.eps_PE = get_number(j, "finite_size", "eps_PE", fs.eps_PE);
        fs.dim_HX = static_cast<int>(get_uint(j, "finite_size", "dim_HX",
                                              static_cast<std::uint64_t>(fs.dim_HX)));
        fs.use_upper_tB = get_bool(j, "finite_size", "use_upper_tB", false);
        s.finite_size = fs;
    }
    if (root.contains("sweep")) {
        const json& j = root["sweep"];
        expect_object(j, "sweep");
        check_keys(j, "sweep", {"from_km", "to_km", "step_km"});
        s.sweep.from_km = get_number(j, "sweep", "from_km", s.sweep.from_km);
        s.sweep.to_km = get_number(j, "sweep", "to_km", s.sweep.to_km);
        s.sweep.step_km = get_number(j, "sweep", "step_km", s.sweep.step_km);
    }
    if (root.contains("grid")) {
        const json& j = root["grid"];
        expect_object(j, "grid");
        check_keys(j, "grid", {"eta_min", "eta_max", "points"});
        s.grid.eta_min = get_number(j, "grid", "eta_min", s.grid.eta_min);
        s.grid.eta_max = get_number(j, "grid", "eta_max", s.grid.eta_max);
        s.grid.points =
            static_cast<int>(get_uint(j, "grid", "points",
                                      static_cast<std::uint64_t>(s.grid.points)));
    }
    if (root.contains("mc")) {
        const json& j = root["mc"];
        expect_object(j, "mc");
        check_keys(j, "mc", {"shots", "seed", "workers"});
        s.mc.shots = get_uint(j, "mc", "shots", s.mc.shots);
        s.mc.seed = get_uint(j, "mc", "seed", s.mc.seed);
        s.mc.workers = static_cast<unsigned>(get_uint(j, "mc", "workers", s.mc.workers));
    }
    if (root.contains("excess_noise")) {
        const json& j = root["excess_noise"];
        expect_object(j, "excess_noise");
        check_keys(j, "excess_noise", {"eta_B_values"});
        if (j.contains("eta_B_values")) {
            if (!j["eta_B_values"].is_array()) {
                fail("excess_noise.eta_B_values", "must be an array of numbers");
            }
            s.noise_curve_eta_B.clear();
            for (const auto& v : j["eta_B_values"]) {
                if (!v.is_number()) {
                    fail("excess_noise.eta_B_values", "must be an array of numbers");
                }
                s.noise_curve_eta_B.push_back(v.get<double>());
            }
        }
    }
    s.validate();
    return s;
}

std::string canonical_config(const Scenario& s) {
    json root;
    json topo;
    topo["layout"] = to_string(s.topology);
    if (s.topology == Topology::explicit_legs) {
        topo["L_AC_km"] = s.channel.L_AC;
        topo["L_BC_km"] = s.channel.L_BC;
    } else {
        topo["distance_km"] = s.distance_km;
    }
    root["topology"] = topo;
    root["channel"] = {{"alpha_db_per_km", s.channel.alpha},
                       {"eps_A", s.channel.eps_A},
                       {"eps_B", s.channel.eps_B},
                       {"eps_det", s.channel.eps_det}};
    root["protocol"] = {
        {"V_A", s.protocol.V_A}, {"V_B", s.protocol.V_B}, {"beta", s.protocol.beta_R}};
    root["matching"] = {{"eta_A1", s.matching.eta_A1},
                        {"eta_A2", s.matching.eta_A2},
                        {"eta_B1", s.matching.eta_B1},
                        {"eta_B2", s.matching.eta_B2}};
    if (s.waveforms) {
        root["waveforms"] = {{"signal_A", s.waveforms->signal_A},
                             {"signal_B", s.waveforms->signal_B},
                             {"lo", s.waveforms->lo},
                             {"omega_lo", s.waveforms->omega_lo},
                             {"delta_omega_A", s.waveforms->delta_omega_A},
                             {"delta_omega_B", s.waveforms->delta_omega_B}};
    }
    if (s.finite_size) {
        root["finite_size"] = {{"N", s.finite_size->N},
                               {"m", s.finite_size->m},
                               {"eps_bar", s.finite_size->eps_bar},
                               {"eps_PA", s.finite_size->eps_PA},
                               {"eps_PE", s.finite_size->eps_PE},
                               {"dim_HX", s.finite_size->dim_HX},
                               {"use_upper_tB", s.finite_size->use_upper_tB}};
    }
    root["sweep"] = {{"from_km", s.sweep.from_km},
                     {"to_km", s.sweep.to_km},
                     {"step_km", s.sweep.step_km}};
    root["grid"] = {{"eta_min", s.grid.eta_min},
                    {"eta_max", s.grid.eta_max},
                    {"points", s.grid.points}};
    root["mc"] = {{"shots", s.mc.shots}, {"seed", s.mc.seed}, {"workers", s.mc.workers}};
    root["excess_noise"] = {{"eta_B_values", s.noise_curve_eta_B}};
    return root.dump();
}

std::string config_hash(const Scenario& s) {
    const std::string text = canonical_config(s);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

}  // namespace cvmdi::experiments
