#include "doctest.h"

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stepcast/bucketing.hpp"
#include "stepcast/core.hpp"
#include "stepcast/features.hpp"
#include "stepcast/ingest.hpp"

namespace {

using stepcast::Date;
using stepcast::Error;
using stepcast::ErrorKind;
using stepcast::Matrix;
using stepcast::bucketing::HourlyDay;
using namespace stepcast::features;

HourlyDay make_day(const std::string& user, const Date& date,
                   const std::array<double, 24>& buckets) {
    HourlyDay day;
    day.user_id = user;
    day.date = date;
    day.buckets = buckets;
    day.steps_today = 0.0;
    for (double b : buckets) day.steps_today += b;
    return day;
}

HourlyDay flat_day(const std::string& user, const Date& date, double per_hour) {
    std::array<double, 24> buckets{};
    buckets.fill(per_hour);
    return make_day(user, date, buckets);
}

}  // namespace

TEST_CASE("goal label: totals at or above the goal count as achieved") {
    HourlyDay day = flat_day("u", Date{2015, 3, 2}, 500.0);  // 12000 total
    CHECK(label_goal(day, 10000));

    day.steps_today = 10000.0;
    CHECK(label_goal(day, 10000));

    day.steps_today = 9999.5;
    CHECK_FALSE(label_goal(day, 10000));
}

TEST_CASE("goal resolution: override beats profile beats default") {
    FeatureConfig config;

    stepcast::ingest::UserProfile profile;
    profile.user_id = "u";
    profile.step_goal = 8000;
    CHECK(resolve_goal(&profile, config) == 8000);

    CHECK(resolve_goal(nullptr, config) == 10000);

    config.goal_override = 12000;
    CHECK(resolve_goal(&profile, config) == 12000);
    CHECK(resolve_goal(nullptr, config) == 12000);
}

TEST_CASE("column schema fixes names and order from the config alone") {
    FeatureConfig config;
    config.cutoff_hour = 11;
    config.window = Window::AllHoursToCutoff;
    config.include_cumulative = true;
    config.include_yesterday = true;
    config.include_weekday = true;
    config.include_weather = true;
    config.include_place = true;

    ColumnSchema schema = column_schema(config);
    std::vector<std::string> expected;
    for (int h = 0; h <= 11; ++h) expected.push_back("steps_h" + std::to_string(h));
    expected.insert(expected.end(), {"cum_steps", "steps_yesterday", "day_of_week",
                                     "is_weekday", "weather_clear", "weather_cloudy",
                                     "weather_rain", "weather_snow", "weather_fog",
                                     "weather_unknown", "temperature_c", "place_home",
                                     "place_work", "place_gym", "place_transit",
                                     "place_other", "place_unknown"});
    CHECK(schema.names == expected);
    CHECK(schema.kinds.size() == schema.names.size());
    CHECK(schema.kinds[12] == ColumnKind::Continuous);  // cum_steps
    CHECK(schema.kinds[15] == ColumnKind::Indicator);   // is_weekday
}

TEST_CASE("four-hour window at cutoff 11 projects buckets 8..11 in order") {
    std::array<double, 24> buckets{};
    buckets[8] = 100.0;
    buckets[9] = 200.0;
    buckets[10] = 300.0;
    buckets[11] = 400.0;
    HourlyDay day = make_day("u1", Date{2015, 3, 2}, buckets);

    FeatureConfig config = FeatureConfig::last4_preset(11);
    FeatureMatrix matrix = build_matrix({day}, {}, config);

    REQUIRE(matrix.rows.size() == 1);
    CHECK(matrix.schema.names ==
          std::vector<std::string>{"steps_h8", "steps_h9", "steps_h10", "steps_h11"});
    CHECK(matrix.rows[0].x == std::vector<double>{100.0, 200.0, 300.0, 400.0});
}

TEST_CASE("full window at cutoff 11 yields one column per hour 0..11") {
    FeatureConfig config;
    config.cutoff_hour = 11;
    config.window = Window::AllHoursToCutoff;
    config.include_cumulative = false;
    config.include_yesterday = false;
    config.include_weekday = false;

    FeatureMatrix matrix = build_matrix({flat_day("u1", Date{2015, 3, 2}, 10.0)}, {}, config);
    REQUIRE(matrix.rows.size() == 1);
    CHECK(matrix.rows[0].x.size() == 12);
    CHECK(matrix.schema.names.front() == "steps_h0");
    CHECK(matrix.schema.names.back() == "steps_h11");
}

TEST_CASE("cumulative column sums the buckets up to and including the cutoff") {
    std::array<double, 24> buckets{};
    for (int h = 0; h < 24; ++h) buckets[h] = 10.0 * (h + 1);
    HourlyDay day = make_day("u1", Date{2015, 3, 2}, buckets);

    FeatureConfig config;
    config.cutoff_hour = 5;
    config.window = Window::AllHoursToCutoff;
    config.include_cumulative = true;
    config.include_yesterday = false;
    config.include_weekday = false;

    FeatureMatrix matrix = build_matrix({day}, {}, config);
    REQUIRE(matrix.rows.size() == 1);
    // 10+20+...+60 = 210, and the label target is still the full-day total.
    CHECK(matrix.rows[0].x[6] == doctest::Approx(210.0).epsilon(1e-12));
    CHECK(matrix.rows[0].y_reg == doctest::Approx(day.steps_today).epsilon(1e-12));
}

TEST_CASE("yesterday column drops history-less days and counts them") {
    FeatureConfig config;
    config.cutoff_hour = 11;
    config.window = Window::AllHoursToCutoff;
    config.include_cumulative = false;
    config.include_yesterday = true;
    config.include_weekday = false;

    HourlyDay d1 = flat_day("u1", Date{2015, 3, 2}, 100.0);
    HourlyDay d2 = flat_day("u1", Date{2015, 3, 3}, 200.0);
    FeatureMatrix matrix = build_matrix({d2, d1}, {}, config);

    REQUIRE(matrix.rows.size() == 1);
    CHECK(matrix.rows[0].date == Date{2015, 3, 3});
    CHECK(matrix.rows[0].x.back() == doctest::Approx(2400.0));  // d1 total
    CHECK(matrix.diagnostics.rows_emitted == 1);
    CHECK(matrix.diagnostics.rows_dropped_no_history == 1);
}

TEST_CASE("yesterday must be the adjacent calendar date, not just any prior day") {
    FeatureConfig config;
    config.cutoff_hour = 11;
    config.window = Window::AllHoursToCutoff;
    config.include_cumulative = false;
    config.include_yesterday = true;
    config.include_weekday = false;

    HourlyDay d1 = flat_day("u1", Date{2015, 3, 2}, 100.0);
    HourlyDay d3 = flat_day("u1", Date{2015, 3, 4}, 200.0);  // gap on 3-03
    FeatureMatrix matrix = build_matrix({d1, d3}, {}, config);

    CHECK(matrix.rows.empty());
    CHECK(matrix.diagnostics.rows_dropped_no_history == 2);
}

TEST_CASE("weekday columns encode iso day number and a weekday indicator") {
    FeatureConfig config;
    config.cutoff_hour = 11;
    config.window = Window::AllHoursToCutoff;
    config.include_cumulative = false;
    config.include_yesterday = false;
    config.include_weekday = true;

    HourlyDay monday = flat_day("u1", Date{2015, 2, 2}, 10.0);
    HourlyDay sunday = flat_day("u1", Date{2015, 2, 8}, 10.0);
    FeatureMatrix matrix = build_matrix({sunday, monday}, {}, config);

    REQUIRE(matrix.rows.size() == 2);
    // Rows come back sorted by date, so Monday first.
    CHECK(matrix.rows[0].x[12] == 1.0);
    CHECK(matrix.rows[0].x[13] == 1.0);
    CHECK(matrix.rows[1].x[12] == 7.0);
    CHECK(matrix.rows[1].x[13] == 0.0);
}

TEST_CASE("weather encodes a one-hot condition plus temperature, unknown when absent") {
    FeatureConfig config;
    config.cutoff_hour = 11;
    config.window = Window::AllHoursToCutoff;
    config.include_cumulative = false;
    config.include_yesterday = false;
    config.include_weekday = false;
    config.include_weather = true;

    HourlyDay rainy = flat_day("u1", Date{2015, 3, 2}, 10.0);
    rainy.weather = stepcast::bucketing::WeatherObs{"rain", 4.0};
    HourlyDay bare = flat_day("u1", Date{2015, 3, 3}, 10.0);

    FeatureMatrix matrix = build_matrix({rainy, bare}, {}, config);
    REQUIRE(matrix.rows.size() == 2);

    const auto& schema = matrix.schema.names;
    auto col = [&schema](const std::string& name) {
        for (std::size_t j = 0; j < schema.size(); ++j)
            if (schema[j] == name) return j;
        FAIL("missing column " << name);
        return std::size_t{0};
    };

    CHECK(matrix.rows[0].x[col("weather_rain")] == 1.0);
    CHECK(matrix.rows[0].x[col("weather_clear")] == 0.0);
    CHECK(matrix.rows[0].x[col("weather_unknown")] == 0.0);
    CHECK(matrix.rows[0].x[col("temperature_c")] == 4.0);

    CHECK(matrix.rows[1].x[col("weather_rain")] == 0.0);
    CHECK(matrix.rows[1].x[col("weather_unknown")] == 1.0);
    CHECK(matrix.rows[1].x[col("temperature_c")] == 0.0);
}

TEST_CASE("place encodes the cutoff hour's dominant type, folding strangers into other") {
    FeatureConfig config;
    config.cutoff_hour = 11;
    config.window = Window::AllHoursToCutoff;
    config.include_cumulative = false;
    config.include_yesterday = false;
    config.include_weekday = false;
    config.include_place = true;

    HourlyDay at_gym = flat_day("u1", Date{2015, 3, 2}, 10.0);
    at_gym.hourly_place_type.emplace();
    (*at_gym.hourly_place_type)[11] = "gym";

    HourlyDay at_library = flat_day("u1", Date{2015, 3, 3}, 10.0);
    at_library.hourly_place_type.emplace();
    (*at_library.hourly_place_type)[11] = "library";

    HourlyDay nowhere = flat_day("u1", Date{2015, 3, 4}, 10.0);

    FeatureMatrix matrix = build_matrix({at_gym, at_library, nowhere}, {}, config);
    REQUIRE(matrix.rows.size() == 3);

    const auto& schema = matrix.schema.names;
    auto col = [&schema](const std::string& name) {
        for (std::size_t j = 0; j < schema.size(); ++j)
            if (schema[j] == name) return j;
        FAIL("missing column " << name);
        return std::size_t{0};
    };

    CHECK(matrix.rows[0].x[col("place_gym")] == 1.0);
    CHECK(matrix.rows[0].x[col("place_unknown")] == 0.0);
    CHECK(matrix.rows[1].x[col("place_other")] == 1.0);
    CHECK(matrix.rows[1].x[col("place_gym")] == 0.0);
    CHECK(matrix.rows[2].x[col("place_unknown")] == 1.0);
}

TEST_CASE("profile goals drive labels per user") {
    FeatureConfig config;
    config.cutoff_hour = 11;
    config.window = Window::AllHoursToCutoff;
    config.include_cumulative = false;
    config.include_yesterday = false;
    config.include_weekday = false;

    HourlyDay day_a = flat_day("easy", Date{2015, 3, 2}, 300.0);  // 7200 total
    HourlyDay day_b = flat_day("hard", Date{2015, 3, 2}, 300.0);

    std::map<std::string, stepcast::ingest::UserProfile> profiles;
    stepcast::ingest::UserProfile easy;
    easy.user_id = "easy";
    easy.step_goal = 7000;
    profiles["easy"] = easy;
    stepcast::ingest::UserProfile hard;
    hard.user_id = "hard";
    hard.step_goal = 8000;
    profiles["hard"] = hard;

    FeatureMatrix matrix = build_matrix({day_b, day_a}, profiles, config);
    REQUIRE(matrix.rows.size() == 2);
    CHECK(matrix.rows[0].user_id == "easy");
    CHECK(matrix.rows[0].y_class);
    CHECK_FALSE(matrix.rows[1].y_class);
}

TEST_CASE("duplicate user-date pairs are rejected") {
    FeatureConfig config;
    config.cutoff_hour = 11;
    config.window = Window::AllHoursToCutoff;
    config.include_cumulative = false;
    config.include_yesterday = false;
    config.include_weekday = false;

    HourlyDay a = flat_day("u1", Date{2015, 3, 2}, 10.0);
    HourlyDay b = flat_day("u1", Date{2015, 3, 2}, 20.0);
    try {
        build_matrix({a, b}, {}, config);
        FAIL("expected duplicate rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidValue);
    }
}

TEST_CASE("config validation rejects out-of-range cutoffs for the window") {
    FeatureConfig config;
    config.cutoff_hour = 24;
    CHECK_THROWS_AS(config.validate(), Error);

    config = FeatureConfig::last4_preset(2);  // needs buckets -1..2
    CHECK_THROWS_AS(config.validate(), Error);
    CHECK_NOTHROW(FeatureConfig::last4_preset(3).validate());
}

TEST_CASE("standardize maps the two-point column to minus one and plus one") {
    FeatureConfig config = FeatureConfig::last4_preset(11);
    FeatureMatrix matrix;
    matrix.schema = column_schema(config);
    matrix.config = config;
    for (double v : {2.0, 4.0}) {
        FeatureRow row;
        row.user_id = "u";
        row.x = {v, v, v, v};
        matrix.rows.push_back(row);
    }

    Scaler scaler = standardize(matrix);
    CHECK(scaler.means[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(scaler.scales[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(matrix.rows[0].x[0] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(matrix.rows[1].x[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("standardize centers constant columns and records scale one") {
    FeatureConfig config = FeatureConfig::last4_preset(11);
    FeatureMatrix matrix;
    matrix.schema = column_schema(config);
    matrix.config = config;
    for (int i = 0; i < 3; ++i) {
        FeatureRow row;
        row.user_id = "u";
        row.x = {5.0, double(i), double(i), double(i)};
        matrix.rows.push_back(row);
    }

    Scaler scaler = standardize(matrix);
    CHECK(scaler.scales[0] == 1.0);
    for (const auto& row : matrix.rows) CHECK(row.x[0] == 0.0);
}

TEST_CASE("standardize leaves indicator columns untouched") {
    FeatureConfig config;
    config.cutoff_hour = 11;
    config.window = Window::AllHoursToCutoff;
    config.include_cumulative = false;
    config.include_yesterday = false;
    config.include_weekday = true;

    std::vector<HourlyDay> days;
    for (int d = 2; d <= 9; ++d) days.push_back(flat_day("u1", Date{2015, 3, d}, 10.0 * d));
    FeatureMatrix matrix = build_matrix(days, {}, config);
    std::size_t indicator = matrix.schema.names.size() - 1;  // is_weekday
    std::vector<double> before;
    for (const auto& row : matrix.rows) before.push_back(row.x[indicator]);

    standardize(matrix);
    for (std::size_t i = 0; i < matrix.rows.size(); ++i)
        CHECK(matrix.rows[i].x[indicator] == before[i]);
}

TEST_CASE("standardized continuous columns have zero mean and unit spread") {
    stepcast::Rng rng(404);
    FeatureConfig config = FeatureConfig::last4_preset(11);
    FeatureMatrix matrix;
    matrix.schema = column_schema(config);
    matrix.config = config;
    for (int i = 0; i < 100; ++i) {
        FeatureRow row;
        row.user_id = "u";
        row.x = {rng.normal() * 3.0 + 7.0, rng.uniform() * 50.0, rng.normal(),
                 rng.uniform()};
        matrix.rows.push_back(row);
    }

    standardize(matrix);
    for (std::size_t j = 0; j < 4; ++j) {
        double mean = 0.0;
        for (const auto& row : matrix.rows) mean += row.x[j];
        mean /= double(matrix.rows.size());
        double var = 0.0;
        for (const auto& row : matrix.rows) var += (row.x[j] - mean) * (row.x[j] - mean);
        var /= double(matrix.rows.size());
        CHECK(std::abs(mean) <= 1e-12);
        CHECK(std::abs(std::sqrt(var) - 1.0) <= 1e-9);
    }
}

TEST_CASE("standardize needs at least two rows") {
    FeatureConfig config = FeatureConfig::last4_preset(11);
    FeatureMatrix matrix;
    matrix.schema = column_schema(config);
    matrix.config = config;
    FeatureRow row;
    row.x = {1.0, 2.0, 3.0, 4.0};
    matrix.rows.push_back(row);

    try {
        standardize(matrix);
        FAIL("expected a row-count error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooFewRows);
    }
}

TEST_CASE("a scaler fitted on training rows applies unchanged to held-out rows") {
    stepcast::Rng rng(505);
    FeatureConfig config = FeatureConfig::last4_preset(11);
    FeatureMatrix matrix;
    matrix.schema = column_schema(config);
    matrix.config = config;
    for (int i = 0; i < 30; ++i) {
        FeatureRow row;
        row.user_id = "u";
        row.x = {rng.normal() * 2.0, rng.normal() + 5.0, rng.uniform(), rng.normal()};
        matrix.rows.push_back(row);
    }

    std::vector<std::size_t> train_rows;
    for (std::size_t i = 0; i < 20; ++i) train_rows.push_back(i);
    Scaler scaler = fit_scaler(matrix, train_rows);

    // Moments come from the training rows only.
    double mean0 = 0.0;
    for (std::size_t i : train_rows) mean0 += matrix.rows[i].x[0];
    mean0 /= double(train_rows.size());
    CHECK(scaler.means[0] == doctest::Approx(mean0).epsilon(1e-12));

    FeatureMatrix copy = matrix;
    scaler.apply(copy);
    for (std::size_t i = 0; i < copy.rows.size(); ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(copy.rows[i].x[j] ==
                  doctest::Approx((matrix.rows[i].x[j] - scaler.means[j]) / scaler.scales[j])
                      .epsilon(1e-12));

    // The Matrix overload matches the row-wise one.
    Matrix design = matrix.design();
    scaler.apply(design);
    for (std::size_t i = 0; i < copy.rows.size(); ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(design.at(i, j) == copy.rows[i].x[j]);
}

TEST_CASE("csv export writes the schema header then one line per row") {
    std::array<double, 24> buckets{};
    buckets[8] = 1.5;
    buckets[9] = 2.0;
    buckets[10] = 3.0;
    buckets[11] = 4.0;
    HourlyDay day = make_day("u1", Date{2015, 3, 2}, buckets);

    FeatureConfig config = FeatureConfig::last4_preset(11);
    FeatureMatrix matrix = build_matrix({day}, {}, config);
    std::string csv = to_csv(matrix);

    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "steps_h8,steps_h9,steps_h10,steps_h11,y_class,y_reg");
    std::string row;
    std::getline(lines, row);
    CHECK(row == "1.5,2,3,4,0,10.5");
    std::string extra;
    CHECK_FALSE(std::getline(lines, extra));
}
