#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "stepcast/core.hpp"
#include "stepcast/ingest.hpp"

namespace stepcast::bucketing {

struct WeatherObs {
    std::string condition;
    double temperature_c = 0.0;

    bool operator==(const WeatherObs&) const = default;
};

enum class DaySource { Pedometer, Storyline };

/// Canonical 24-bucket hourly step vector for one day. Buckets are
/// real-valued so the equal-split rule conserves totals exactly; rounding
/// happens only at report formatting.
struct HourlyDay {
    std::string user_id;
    Date date;
    std::array<double, 24> buckets{};
    double steps_today = 0.0;
    DaySource source = DaySource::Pedometer;
    std::optional<std::array<std::optional<std::string>, 24>> hourly_place_type;
    std::optional<WeatherObs> weather;
};

/// How a multi-hour segment's steps are spread over the hour buckets its time
/// span intersects. EqualPerBucket divides by the bucket count (the default);
/// DurationWeighted divides in proportion to overlap time and exists for
/// sensitivity analysis.
enum class SplitRule { EqualPerBucket, DurationWeighted };

HourlyDay bucket_minutes(const ingest::MinuteSeries& series);

HourlyDay bucket_segments(const ingest::StorylineDay& day,
                          SplitRule rule = SplitRule::EqualPerBucket);

/// Per hour, the place type of the Location segment with the greatest
/// time-overlap with that hour; absent where no typed Location touches it.
std::array<std::optional<std::string>, 24> dominant_place_types(const ingest::StorylineDay& day);

/// Convenience: bucket a raw day of either format; storyline days also get
/// their hourly place types.
HourlyDay to_hourly(const ingest::RawDay& day, SplitRule rule = SplitRule::EqualPerBucket);

/// Weather fixture: CSV with header `date,condition,temperature_c`, one row
/// per date. Lines starting with '#' before the header are comments; a
/// `# conditions: a,b,c` comment overrides the default closed condition set
/// {clear,cloudy,rain,snow,fog}.
class WeatherTable {
public:
    static WeatherTable load(const std::filesystem::path& csv_path);
    static WeatherTable parse(const std::string& csv_text);

    std::optional<WeatherObs> lookup(const Date& date) const;
    std::size_t size() const { return entries_.size(); }

private:
    std::map<Date, WeatherObs> entries_;
};

/// Sets day.weather from the fixture entry matching the date; leaves the day
/// unchanged when there is no entry.
HourlyDay attach_weather(HourlyDay day, const WeatherTable& fixtures);

}  // namespace stepcast::bucketing
