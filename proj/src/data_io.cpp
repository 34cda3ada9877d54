#include "nilm/data_io.hpp"

#include "nilm/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace nilm {

namespace {
constexpr int kDatasetVersion = 1;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

int HouseDataset::find_appliance(const std::string& id) const {
    for (std::size_t i = 0; i < registry.size(); ++i)
        if (registry[i].id == id) return static_cast<int>(i);
    return -1;
}

void HouseDataset::check_aligned() const {
    const Index n = aggregate_power.size();
    auto check = [&](const SampledSeries& s, const std::string& what) {
        if (s.size() != n || s.start_time != aggregate_power.start_time ||
            s.step != aggregate_power.step)
            throw NilmError("DomainMismatch: channel " + what + " not aligned with aggregate");
    };
    check(aggregate_water, "aggregate_water");
    if (appliance_power.size() != registry.size() || appliance_water.size() != registry.size())
        throw NilmError("DomainMismatch: registry/channel count mismatch");
    for (std::size_t i = 0; i < registry.size(); ++i) {
        check(appliance_power[i], registry[i].id + "/power");
        check(appliance_water[i], registry[i].id + "/water");
    }
}

HouseDataset HouseDataset::slice(Index start, Index len) const {
    if (start < 0 || len <= 0 || start + len > samples())
        throw NilmError("InsufficientData: slice [" + std::to_string(start) + ", +" +
                        std::to_string(len) + ") out of range");
    auto cut = [&](const SampledSeries& s) {
        SampledSeries out = s;
        out.start_time = s.time_at(start);
        out.values = s.values.segment(start, len);
        return out;
    };
    HouseDataset out;
    out.aggregate_power = cut(aggregate_power);
    out.aggregate_water = cut(aggregate_water);
    out.registry = registry;
    for (std::size_t i = 0; i < registry.size(); ++i) {
        out.appliance_power.push_back(cut(appliance_power[i]));
        out.appliance_water.push_back(cut(appliance_water[i]));
    }
    return out;
}

void SimConfig::validate() const {
    if (duration_days < 1) throw NilmError("InvalidConfig: duration_days must be >= 1");
    if (noise_std < 0.0) throw NilmError("InvalidConfig: noise_std must be >= 0");
    if (!(step_seconds > 0.0)) throw NilmError("InvalidConfig: step_seconds must be > 0");
}

std::vector<ApplianceSpec> table1_registry() {
    std::vector<ApplianceSpec> reg;
    reg.push_back({"fridge", {{0, 0, 0}, {2, 100, 200}, {3, 400, 500}}, {}});
    reg.push_back({"dryer", {{0, 0, 0}, {2, 4000, 5000}}, {}});
    reg.push_back({"dishwasher",
                   {{0, 0, 0}, {2, 100, 200}, {3, 700, 800}},
                   {{0, 6, 8.0}, {10, 4, 6.0}, {18, 3, 6.0}}});
    reg.push_back({"heat_pump", {{0, 0, 0}, {2, 1000, 1850}}, {}});
    reg.push_back({"oven", {{0, 0, 0}, {2, 3400, 3550}}, {}});
    reg.push_back({"basement", {{0, 0, 0}, {2, 330, 350}}, {}});
    reg.push_back({"washing_machine", {{0, 0, 0}, {2, 100, 250}, {3, 400, 700}}, {}});
    return reg;
}

std::vector<ApplianceSpec> default_sim_registry() {
    // the two draws share the dishwasher's flow rates, so amplitude alone
    // cannot attribute water; only timing patterns and power events can
    auto reg = table1_registry();
    reg.push_back({"faucet", {{0, 0, 0}}, {{0, 4, 8.0}}});
    reg.push_back({"shower", {{0, 0, 0}}, {{0, 6, 6.0}}});
    return reg;
}

SimConfig default_sim_config(int duration_days, std::uint64_t seed, double noise_std) {
    SimConfig cfg;
    cfg.duration_days = duration_days;
    cfg.seed = seed;
    cfg.noise_std = noise_std;
    cfg.usage["fridge"] = {8.0, 15.0, {{2, 15, 25}}};
    cfg.usage["dryer"] = {0.9, 30.0, {{2, 40, 60}}};
    cfg.usage["dishwasher"] = {1.1, 60.0, {{2, 10, 12}, {3, 8, 10}, {2, 4, 6}, {3, 10, 14}}};
    cfg.usage["heat_pump"] = {8.0, 10.0, {{2, 20, 40}}};
    cfg.usage["oven"] = {1.2, 30.0, {{2, 25, 50}}};
    cfg.usage["basement"] = {4.0, 20.0, {{2, 30, 90}}};
    cfg.usage["washing_machine"] = {1.0, 45.0, {{2, 8, 12}, {3, 6, 10}, {2, 5, 8}}};
    cfg.usage["faucet"] = {8.0, 8.0, {{0, 2, 6}}};
    cfg.usage["shower"] = {6.0, 10.0, {{0, 4, 10}}};
    return cfg;
}

HouseDataset simulate_house(const SimConfig& cfg, const std::vector<ApplianceSpec>& registry) {
    cfg.validate();
    if (registry.empty()) throw NilmError("InvalidSpec: empty registry");
    for (const auto& spec : registry) spec.validate();

    const double samples_per_day = 86400.0 / cfg.step_seconds;
    const Index n = static_cast<Index>(cfg.duration_days * samples_per_day);
    const double minutes_per_sample = cfg.step_seconds / 60.0;

    HouseDataset ds;
    ds.registry = registry;
    Rng root(cfg.seed);

    for (std::size_t a = 0; a < registry.size(); ++a) {
        const ApplianceSpec& spec = registry[a];
        Rng rng = root.fork(a);
        ArrayXd power = ArrayXd::Zero(n);
        ArrayXd water = ArrayXd::Zero(n);

        auto it = cfg.usage.find(spec.id);
        if (it != cfg.usage.end() && !it->second.segments.empty()) {
            const UsageModel& um = it->second;
            const double start_prob = um.cycles_per_day / samples_per_day;
            Index t = 0;
            while (t < n) {
                if (rng.uniform() >= start_prob) {
                    ++t;
                    continue;
                }
                const Index cycle_start = t;
                // lay down the power segments
                for (const auto& seg : um.segments) {
                    const Index dur = std::max<Index>(
                        1, static_cast<Index>(std::llround(
                               rng.uniform(seg.min_minutes, seg.max_minutes) / minutes_per_sample)));
                    const ApplianceMode* mode = spec.find_mode(seg.mode_index);
                    if (!mode)
                        throw NilmError("InvalidSpec: " + spec.id + " usage references mode " +
                                        std::to_string(seg.mode_index));
                    const double level = rng.uniform(mode->power_low, mode->power_high);
                    for (Index i = t; i < std::min(n, t + dur); ++i) power[i] = level;
                    t += dur;
                }
                const Index cycle_end = std::min(n, t);
                // water program, time-locked to the cycle start
                for (const auto& seg : spec.water_program) {
                    const Index w0 = cycle_start +
                                     static_cast<Index>(std::llround(seg.offset_min / minutes_per_sample));
                    const Index w1 = w0 + std::max<Index>(1, static_cast<Index>(std::llround(
                                                              seg.duration_min / minutes_per_sample)));
                    for (Index i = w0; i < std::min({n, w1, cycle_end}); ++i) water[i] += seg.flow;
                }
                t += static_cast<Index>(std::llround(um.min_gap_minutes / minutes_per_sample));
            }
        }

        ds.appliance_power.push_back(
            {cfg.start_time, cfg.step_seconds, power, SignalKind::Power});
        ds.appliance_water.push_back(
            {cfg.start_time, cfg.step_seconds, water, SignalKind::Water});
    }

    ArrayXd agg_power = ArrayXd::Zero(n);
    ArrayXd agg_water = ArrayXd::Zero(n);
    for (std::size_t a = 0; a < registry.size(); ++a) {
        agg_power += ds.appliance_power[a].values;
        agg_water += ds.appliance_water[a].values;
    }
    if (cfg.noise_std > 0.0) {
        Rng noise = root.fork(registry.size() + 1);
        for (Index i = 0; i < n; ++i)
            agg_power[i] = std::max(0.0, agg_power[i] + noise.gaussian(0.0, cfg.noise_std));
    }
    ds.aggregate_power = {cfg.start_time, cfg.step_seconds, agg_power, SignalKind::Power};
    ds.aggregate_water = {cfg.start_time, cfg.step_seconds, agg_water, SignalKind::Water};
    return ds;
}

namespace {

bool parse_double(const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end != begin && *end == '\0';
}

std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, sep)) fields.push_back(f);
    return fields;
}

}  // namespace

SampledSeries load_meter_csv(const std::string& path, const CsvColumns& cols, SignalKind kind,
                             GapPolicy gap_policy) {
    std::ifstream in(path);
    if (!in) throw NilmError("IoError: cannot open " + path);

    std::vector<double> times;
    std::vector<double> values;
    std::string line;
    long line_no = 0;
    const int needed = std::max(cols.time_col, cols.value_col) + 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.back() == '\r') line.pop_back();
        const auto fields = split_line(line, cols.separator);
        if (static_cast<int>(fields.size()) < needed)
            throw NilmError("ParseError: line " + std::to_string(line_no) + " of " + path);
        double t, v;
        if (!parse_double(fields[cols.time_col], t) || !parse_double(fields[cols.value_col], v)) {
            if (line_no == 1) continue;  // header row
            throw NilmError("ParseError: line " + std::to_string(line_no) + " of " + path);
        }
        times.push_back(t);
        values.push_back(v);
    }
    if (values.empty()) throw NilmError("EmptySeries: " + path);

    SampledSeries s;
    s.kind = kind;
    s.start_time = static_cast<std::int64_t>(times.front());
    s.step = times.size() > 1 ? times[1] - times[0] : 60.0;
    if (times.size() > 1 && !(s.step > 0.0))
        throw NilmError("NonMonotoneTime: " + path + " near line 2");

    std::vector<double> filled;
    filled.push_back(values[0]);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double gap = times[i] - times[i - 1];
        if (gap <= 0.0)
            throw NilmError("NonMonotoneTime: " + path + " near line " + std::to_string(i + 1));
        const double steps = gap / s.step;
        const long k = std::lround(steps);
        if (std::abs(steps - k) > 1e-6 || k < 1)
            throw NilmError("NonMonotoneTime: irregular step in " + path + " near line " +
                            std::to_string(i + 1));
        if (k > 1) {
            if (gap_policy == GapPolicy::Reject)
                throw NilmError("GapTooLarge: " + std::to_string(k - 1) + " missing samples in " +
                                path + " near line " + std::to_string(i + 1));
            for (long j = 1; j < k; ++j) filled.push_back(filled.back());
        }
        filled.push_back(values[i]);
    }
    s.values = Eigen::Map<const ArrayXd>(filled.data(), static_cast<Index>(filled.size()));
    return s;
}

namespace {

json spec_to_json(const ApplianceSpec& spec) {
    json j;
    j["id"] = spec.id;
    j["modes"] = json::array();
    for (const auto& m : spec.modes)
        j["modes"].push_back({{"index", m.index}, {"low", m.power_low}, {"high", m.power_high}});
    j["water_program"] = json::array();
    for (const auto& w : spec.water_program)
        j["water_program"].push_back(
            {{"offset_min", w.offset_min}, {"duration_min", w.duration_min}, {"flow", w.flow}});
    return j;
}

ApplianceSpec spec_from_json(const json& j) {
    ApplianceSpec spec;
    spec.id = j.at("id").get<std::string>();
    for (const auto& m : j.at("modes"))
        spec.modes.push_back({m.at("index").get<int>(), m.at("low").get<double>(),
                              m.at("high").get<double>()});
    for (const auto& w : j.at("water_program"))
        spec.water_program.push_back({w.at("offset_min").get<double>(),
                                      w.at("duration_min").get<double>(),
                                      w.at("flow").get<double>()});
    return spec;
}

void write_channel_csv(const fs::path& path, const SampledSeries& s) {
    std::ofstream out(path);
    if (!out) throw NilmError("IoError: cannot write " + path.string());
    out << "unix_ts," << (s.kind == SignalKind::Power ? "watts" : "flow") << "\n";
    for (Index t = 0; t < s.size(); ++t)
        out << s.time_at(t) << "," << format_double(s.values[t]) << "\n";
}

SampledSeries read_channel_csv(const fs::path& path, SignalKind kind, double step) {
    SampledSeries s = load_meter_csv(path.string(), {}, kind, GapPolicy::Reject);
    s.step = step;  // manifest step wins over the CSV spacing estimate
    return s;
}

}  // namespace

void export_dataset(const HouseDataset& ds, const std::string& dir) {
    ds.check_aligned();
    fs::create_directories(fs::path(dir) / "appliances");

    json manifest;
    manifest["version"] = kDatasetVersion;
    manifest["start_time"] = ds.aggregate_power.start_time;
    manifest["step_seconds"] = ds.aggregate_power.step;
    manifest["samples"] = static_cast<long long>(ds.samples());
    manifest["registry"] = json::array();
    for (const auto& spec : ds.registry) manifest["registry"].push_back(spec_to_json(spec));

    std::ofstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw NilmError("IoError: cannot write manifest in " + dir);
    mf << manifest.dump(2) << "\n";

    write_channel_csv(fs::path(dir) / "aggregate_power.csv", ds.aggregate_power);
    write_channel_csv(fs::path(dir) / "aggregate_water.csv", ds.aggregate_water);
    for (std::size_t i = 0; i < ds.registry.size(); ++i) {
        const auto base = fs::path(dir) / "appliances" / ds.registry[i].id;
        write_channel_csv(base.string() + "_power.csv", ds.appliance_power[i]);
        write_channel_csv(base.string() + "_water.csv", ds.appliance_water[i]);
    }
}

HouseDataset import_dataset(const std::string& dir) {
    std::ifstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw NilmError("IoError: cannot open manifest in " + dir);
    json manifest;
    try {
        mf >> manifest;
    } catch (const std::exception& e) {
        throw NilmError("ParseError: manifest.json in " + dir + ": " + e.what());
    }
    if (!manifest.contains("version") || manifest["version"].get<int>() != kDatasetVersion)
        throw NilmError("VersionMismatch: manifest in " + dir);

    const double step = manifest.at("step_seconds").get<double>();
    HouseDataset ds;
    for (const auto& j : manifest.at("registry")) ds.registry.push_back(spec_from_json(j));

    ds.aggregate_power =
        read_channel_csv(fs::path(dir) / "aggregate_power.csv", SignalKind::Power, step);
    ds.aggregate_water =
        read_channel_csv(fs::path(dir) / "aggregate_water.csv", SignalKind::Water, step);
    for (const auto& spec : ds.registry) {
        const auto base = fs::path(dir) / "appliances" / spec.id;
        ds.appliance_power.push_back(
            read_channel_csv(base.string() + "_power.csv", SignalKind::Power, step));
        ds.appliance_water.push_back(
            read_channel_csv(base.string() + "_water.csv", SignalKind::Water, step));
    }
    ds.check_aligned();
    return ds;
}

}  // namespace nilm
