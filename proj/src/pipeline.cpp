#include "stepcast/pipeline.hpp"

namespace stepcast::pipeline {

LoadedStore load_hourly(const ingest::Store& store,
                        const std::optional<bucketing::WeatherTable>& weather,
                        bucketing::SplitRule rule) {
    LoadedStore loaded;
    std::vector<ingest::RawDay> raw = store.load_days();
    if (raw.empty()) fail(ErrorKind::NoData, "no days found in " + store.root().string());
    loaded.days.reserve(raw.size());
    for (const auto& day : raw) {
        bucketing::HourlyDay hourly = bucketing::to_hourly(day, rule);
        if (weather) hourly = bucketing::attach_weather(std::move(hourly), *weather);
        loaded.days.push_back(std::move(hourly));
    }
    loaded.profiles = store.load_profiles();
    return loaded;
}

}  // namespace stepcast::pipeline
