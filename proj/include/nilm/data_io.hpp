#pragma once

#include "nilm/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace nilm {

/**
 * One household's worth of aligned channels: the two aggregate meters plus
 * per-appliance ground truth. All series share start_time, step and length.
 * appliance_power[i] / appliance_water[i] belong to registry[i]; water
 * channels are all-zero for appliances that draw none.
 */
struct HouseDataset {
    SampledSeries aggregate_power;
    SampledSeries aggregate_water;
    std::vector<ApplianceSpec> registry;
    std::vector<SampledSeries> appliance_power;
    std::vector<SampledSeries> appliance_water;

    Index samples() const { return aggregate_power.size(); }
    double step() const { return aggregate_power.step; }
    int find_appliance(const std::string& id) const;
    void check_aligned() const;

    /// Chronological slice of every channel; the registry is shared.
    HouseDataset slice(Index start, Index len) const;
};

/// One power segment of an appliance cycle; duration is drawn uniformly
/// per cycle from [min_minutes, max_minutes].
struct CycleSegment {
    int mode_index = 2;
    double min_minutes = 5.0;
    double max_minutes = 10.0;
};

struct UsageModel {
    double cycles_per_day = 1.0;
    double min_gap_minutes = 5.0;  // idle time enforced after each cycle
    std::vector<CycleSegment> segments;
};

struct SimConfig {
    int duration_days = 30;
    double noise_std = 5.0;  // Gaussian noise on the aggregate power channel
    std::uint64_t seed = 1;
    double step_seconds = 60.0;
    std::int64_t start_time = 1600000000;
    std::map<std::string, UsageModel> usage;  // appliances without an entry stay off

    void validate() const;
};

/// The seven-appliance mode catalogue used throughout, including the
/// dishwasher's three-segment water program (the drying tail draws none).
std::vector<ApplianceSpec> table1_registry();

/// table1_registry plus a power-free "faucet" water consumer, so the
/// aggregate water channel is not trivially equal to the dishwasher's.
std::vector<ApplianceSpec> default_sim_registry();

/// Usage models matching default_sim_registry.
SimConfig default_sim_config(int duration_days, std::uint64_t seed, double noise_std = 5.0);

/**
 * Seeded household simulator. Each appliance runs an independent cycle
 * state machine over its modes: cycle starts arrive Bernoulli-per-sample
 * at the configured daily rate, per-segment power is drawn uniformly from
 * the mode band and held constant, and water follows the appliance's
 * program time-locked to the cycle start (clipped to the cycle span).
 * aggregate power = sum + Gaussian noise clamped at zero; aggregate water
 * is the exact sum. Identical configs produce bitwise-identical datasets.
 */
HouseDataset simulate_house(const SimConfig& cfg, const std::vector<ApplianceSpec>& registry);

/// How load_meter_csv treats timestamp gaps larger than one step.
enum class GapPolicy { Reject, ForwardFill };

struct CsvColumns {
    int time_col = 0;
    int value_col = 1;
    char separator = ',';
};

/**
 * Reads a (timestamp, value) CSV into a series. Timestamps must be
 * strictly increasing with a fixed step; a non-numeric first row is
 * treated as a header and skipped.
 */
SampledSeries load_meter_csv(const std::string& path, const CsvColumns& cols, SignalKind kind,
                             GapPolicy gap_policy = GapPolicy::Reject);

/// Writes a dataset directory: manifest.json plus one CSV per channel.
/// import(export(ds)) reproduces every value bitwise.
void export_dataset(const HouseDataset& ds, const std::string& dir);
HouseDataset import_dataset(const std::string& dir);

}  // namespace nilm
