#include "stepcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace stepcast::features {

void FeatureConfig::validate() const {
    if (cutoff_hour < 0 || cutoff_hour > 23)
        fail(ErrorKind::InvalidValue, "cutoff_hour " + std::to_string(cutoff_hour) + " outside 0..23");
    if (window == Window::Last4Hours && cutoff_hour < 3)
        fail(ErrorKind::InvalidValue, "Last4Hours window needs cutoff_hour >= 3");
    if (goal_override && *goal_override == 0)
        fail(ErrorKind::InvalidValue, "goal_override must be positive");
}

FeatureConfig FeatureConfig::last4_preset(int cutoff_hour) {
    FeatureConfig config;
    config.cutoff_hour = cutoff_hour;
    config.window = Window::Last4Hours;
    config.include_cumulative = false;
    config.include_yesterday = false;
    config.include_weekday = false;
    config.include_weather = false;
    config.include_place = false;
    return config;
}

const std::vector<std::string>& weather_conditions() {
    static const std::vector<std::string> kConditions = {"clear", "cloudy", "rain", "snow", "fog"};
    return kConditions;
}

const std::vector<std::string>& place_types() {
    static const std::vector<std::string> kTypes = {"home", "work", "gym", "transit", "other"};
    return kTypes;
}

ColumnSchema column_schema(const FeatureConfig& config) {
    config.validate();
    ColumnSchema schema;
    auto add = [&schema](const std::string& name, ColumnKind kind) {
        schema.names.push_back(name);
        schema.kinds.push_back(kind);
    };

    int first_hour = config.window == Window::Last4Hours ? config.cutoff_hour - 3 : 0;
    for (int h = first_hour; h <= config.cutoff_hour; ++h)
        add("steps_h" + std::to_string(h), ColumnKind::Continuous);
    if (config.include_cumulative) add("cum_steps", ColumnKind::Continuous);
    if (config.include_yesterday) add("steps_yesterday", ColumnKind::Continuous);
    if (config.include_weekday) {
        add("day_of_week", ColumnKind::Continuous);
        add("is_weekday", ColumnKind::Indicator);
    }
    if (config.include_weather) {
        for (const auto& c : weather_conditions()) add("weather_" + c, ColumnKind::Indicator);
        add("weather_unknown", ColumnKind::Indicator);
        add("temperature_c", ColumnKind::Continuous);
    }
    if (config.include_place) {
        for (const auto& p : place_types()) add("place_" + p, ColumnKind::Indicator);
        add("place_unknown", ColumnKind::Indicator);
    }
    return schema;
}

bool label_goal(const bucketing::HourlyDay& day, std::uint32_t goal) {
    if (goal == 0) fail(ErrorKind::InvalidValue, "goal must be positive");
    // Boundary equality counts as success.
    return day.steps_today >= static_cast<double>(goal);
}

std::uint32_t resolve_goal(const ingest::UserProfile* profile, const FeatureConfig& config) {
    if (config.goal_override) return *config.goal_override;
    if (profile && profile->step_goal) return *profile->step_goal;
    return 10000;
}

namespace {

void append_one_hot(std::vector<double>& x, const std::vector<std::string>& categories,
                    const std::optional<std::string>& value, bool map_unmatched_to_other) {
    std::size_t hot = categories.size();  // the trailing "unknown" slot
    if (value) {
        auto it = std::find(categories.begin(), categories.end(), *value);
        if (it != categories.end()) {
            hot = static_cast<std::size_t>(it - categories.begin());
        } else if (map_unmatched_to_other) {
            hot = categories.size() - 1;  // "other"
        }
    }
    for (std::size_t i = 0; i <= categories.size(); ++i) x.push_back(i == hot ? 1.0 : 0.0);
}

FeatureRow build_row(const bucketing::HourlyDay& day, std::optional<double> steps_yesterday,
                     std::uint32_t goal, const FeatureConfig& config) {
    FeatureRow row;
    row.user_id = day.user_id;
    row.date = day.date;

    int first_hour = config.window == Window::Last4Hours ? config.cutoff_hour - 3 : 0;
    for (int h = first_hour; h <= config.cutoff_hour; ++h) row.x.push_back(day.buckets[h]);
    if (config.include_cumulative) {
        double cum = 0.0;
        for (int h = 0; h <= config.cutoff_hour; ++h) cum += day.buckets[h];
        row.x.push_back(cum);
    }
    if (config.include_yesterday) row.x.push_back(*steps_yesterday);
    if (config.include_weekday) {
        row.x.push_back(static_cast<double>(day.date.weekday()));
        row.x.push_back(day.date.is_weekday() ? 1.0 : 0.0);
    }
    if (config.include_weather) {
        std::optional<std::string> condition;
        if (day.weather) condition = day.weather->condition;
        append_one_hot(row.x, weather_conditions(), condition, /*map_unmatched_to_other=*/false);
        row.x.push_back(day.weather ? day.weather->temperature_c : 0.0);
    }
    if (config.include_place) {
        std::optional<std::string> place;
        if (day.hourly_place_type) place = (*day.hourly_place_type)[config.cutoff_hour];
        append_one_hot(row.x, place_types(), place, /*map_unmatched_to_other=*/true);
    }

    row.y_reg = day.steps_today;
    row.y_class = label_goal(day, goal);
    return row;
}

}  // namespace

FeatureMatrix build_matrix(const std::vector<bucketing::HourlyDay>& days,
                           const std::map<std::string, ingest::UserProfile>& profiles,
                           const FeatureConfig& config) {
    config.validate();
    FeatureMatrix matrix;
    matrix.schema = column_schema(config);
    matrix.config = config;

    std::vector<const bucketing::HourlyDay*> ordered;
    ordered.reserve(days.size());
    for (const auto& d : days) ordered.push_back(&d);
    std::sort(ordered.begin(), ordered.end(),
              [](const bucketing::HourlyDay* a, const bucketing::HourlyDay* b) {
                  if (a->user_id != b->user_id) return a->user_id < b->user_id;
                  return a->date < b->date;
              });
    for (std::size_t i = 1; i < ordered.size(); ++i) {
        if (ordered[i]->user_id == ordered[i - 1]->user_id &&
            ordered[i]->date == ordered[i - 1]->date)
            fail(ErrorKind::InvalidValue, "duplicate day " + ordered[i]->user_id + "/" +
                                              ordered[i]->date.to_string());
    }

    // steps_yesterday wants the record for the preceding calendar date, not
    // merely the previous record; gaps drop the row.
    std::map<std::pair<std::string, std::int64_t>, double> totals;
    for (const auto* d : ordered) totals[{d->user_id, d->date.day_number()}] = d->steps_today;

    for (const auto* d : ordered) {
        auto it = profiles.find(d->user_id);
        std::uint32_t goal = resolve_goal(it == profiles.end() ? nullptr : &it->second, config);
        std::optional<double> yesterday;
        if (config.include_yesterday) {
            auto prev = totals.find({d->user_id, d->date.day_number() - 1});
            if (prev == totals.end()) {
                ++matrix.diagnostics.rows_dropped_no_history;
                continue;
            }
            yesterday = prev->second;
        }
        matrix.rows.push_back(build_row(*d, yesterday, goal, config));
        ++matrix.diagnostics.rows_emitted;
    }
    return matrix;
}

Matrix FeatureMatrix::design() const {
    Matrix m(rows.size(), schema.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].x.size() != schema.size())
            fail(ErrorKind::DimensionMismatch, "row width does not match schema");
        std::copy(rows[i].x.begin(), rows[i].x.end(), m.row(i).begin());
    }
    return m;
}

std::vector<double> FeatureMatrix::targets_reg() const {
    std::vector<double> y;
    y.reserve(rows.size());
    for (const auto& r : rows) y.push_back(r.y_reg);
    return y;
}

std::vector<int> FeatureMatrix::labels() const {
    std::vector<int> y;
    y.reserve(rows.size());
    for (const auto& r : rows) y.push_back(r.y_class ? 1 : 0);
    return y;
}

Scaler fit_scaler(const FeatureMatrix& matrix, const std::vector<std::size_t>& row_indices) {
    if (row_indices.size() < 2) fail(ErrorKind::TooFewRows, "standardization needs >= 2 rows");
    std::size_t d = matrix.schema.size();
    Scaler scaler;
    scaler.means.assign(d, 0.0);
    scaler.scales.assign(d, 1.0);
    double n = static_cast<double>(row_indices.size());
    for (std::size_t j = 0; j < d; ++j) {
        if (matrix.schema.kinds[j] == ColumnKind::Indicator) continue;
        double mean = 0.0;
        for (auto i : row_indices) mean += matrix.rows[i].x[j];
        mean /= n;
        double var = 0.0;
        for (auto i : row_indices) {
            double c = matrix.rows[i].x[j] - mean;
            var += c * c;
        }
        var /= n;
        scaler.means[j] = mean;
        scaler.scales[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return scaler;
}

void Scaler::apply(FeatureMatrix& matrix) const {
    for (auto& row : matrix.rows) {
        for (std::size_t j = 0; j < row.x.size(); ++j)
            row.x[j] = (row.x[j] - means[j]) / scales[j];
    }
}

void Scaler::apply(Matrix& design) const {
    if (design.cols != means.size()) fail(ErrorKind::DimensionMismatch, "scaler width mismatch");
    for (std::size_t i = 0; i < design.rows; ++i) {
        auto row = design.row(i);
        for (std::size_t j = 0; j < design.cols; ++j) row[j] = (row[j] - means[j]) / scales[j];
    }
}

Scaler standardize(FeatureMatrix& matrix) {
    std::vector<std::size_t> all(matrix.rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Scaler scaler = fit_scaler(matrix, all);
    scaler.apply(matrix);
    return scaler;
}

std::string to_csv(const FeatureMatrix& matrix) {
    std::ostringstream out;
    for (const auto& name : matrix.schema.names) out << name << ',';
    out << "y_class,y_reg\n";
    for (const auto& row : matrix.rows) {
        for (double v : row.x) out << format_double(v) << ',';
        out << (row.y_class ? 1 : 0) << ',' << format_double(row.y_reg) << '\n';
    }
    return out.str();
}

}  // namespace stepcast::features
