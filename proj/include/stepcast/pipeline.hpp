#pragma once

#include <map>
#include <optional>
#include <vector>

#include "stepcast/bucketing.hpp"
#include "stepcast/ingest.hpp"

namespace stepcast::pipeline {

struct LoadedStore {
    std::vector<bucketing::HourlyDay> days;
    std::map<std::string, ingest::UserProfile> profiles;
};

// Loads every stored day, buckets it, and attaches weather when a fixture
// table is given. Raises NoData when the store holds no days.
LoadedStore load_hourly(const ingest::Store& store,
                        const std::optional<bucketing::WeatherTable>& weather = std::nullopt,
                        bucketing::SplitRule rule = bucketing::SplitRule::EqualPerBucket);

}  // namespace stepcast::pipeline
