#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stepcast/bucketing.hpp"
#include "stepcast/core.hpp"
#include "stepcast/ingest.hpp"

namespace stepcast::features {

enum class Window { Last4Hours, AllHoursToCutoff };

/// Which columns a feature matrix carries. The column schema is a pure
/// function of this config, never of the data.
struct FeatureConfig {
    int cutoff_hour = 11;
    Window window = Window::AllHoursToCutoff;
    bool include_cumulative = true;
    bool include_yesterday = true;
    bool include_weekday = true;
    bool include_weather = false;
    bool include_place = false;
    std::optional<std::uint32_t> goal_override;

    void validate() const;

    /// Preset carrying only the four hourly buckets ending at the cutoff.
    static FeatureConfig last4_preset(int cutoff_hour);
};

enum class ColumnKind { Continuous, Indicator };

struct ColumnSchema {
    std::vector<std::string> names;
    std::vector<ColumnKind> kinds;

    std::size_t size() const { return names.size(); }
    bool operator==(const ColumnSchema&) const = default;
};

ColumnSchema column_schema(const FeatureConfig& config);

/// Closed category lists for the one-hot blocks. Unmatched place types map to
/// "other"; missing values map to "unknown" rather than being dropped.
const std::vector<std::string>& weather_conditions();  // clear,cloudy,rain,snow,fog
const std::vector<std::string>& place_types();         // home,work,gym,transit,other

struct FeatureRow {
    std::string user_id;
    Date date;
    std::vector<double> x;
    bool y_class = false;
    double y_reg = 0.0;
};

struct BuildDiagnostics {
    std::size_t rows_emitted = 0;
    std::size_t rows_dropped_no_history = 0;
};

struct FeatureMatrix {
    ColumnSchema schema;
    std::vector<FeatureRow> rows;
    FeatureConfig config;
    BuildDiagnostics diagnostics;

    Matrix design() const;                 // rows × schema.size()
    std::vector<double> targets_reg() const;
    std::vector<int> labels() const;       // 0/1
};

bool label_goal(const bucketing::HourlyDay& day, std::uint32_t goal);

std::uint32_t resolve_goal(const ingest::UserProfile* profile, const FeatureConfig& config);

/// One labeled row per (user, date); with include_yesterday, days without a
/// record for the preceding calendar date are dropped and counted in the
/// diagnostics. Rows come back ordered by (user_id, date).
FeatureMatrix build_matrix(const std::vector<bucketing::HourlyDay>& days,
                           const std::map<std::string, ingest::UserProfile>& profiles,
                           const FeatureConfig& config);

/// Per-column affine transform fitted on one set of rows and applied
/// unchanged to held-out rows. Continuous columns go to zero mean and unit
/// variance (1/n moments; the two-point column (2,4) maps to (-1,1) with
/// scale 1); zero-variance columns are centered with scale recorded as 1;
/// indicator columns pass through untouched.
struct Scaler {
    std::vector<double> means;
    std::vector<double> scales;

    void apply(FeatureMatrix& matrix) const;
    void apply(Matrix& design) const;
};

Scaler standardize(FeatureMatrix& matrix);
Scaler fit_scaler(const FeatureMatrix& matrix, const std::vector<std::size_t>& row_indices);

/// CSV with a header row: the schema's column names, then y_class, y_reg.
std::string to_csv(const FeatureMatrix& matrix);

}  // namespace stepcast::features
