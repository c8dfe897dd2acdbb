#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "stepcast/bucketing.hpp"
#include "stepcast/centroid.hpp"
#include "stepcast/core.hpp"
#include "stepcast/eval.hpp"
#include "stepcast/features.hpp"
#include "stepcast/ingest.hpp"
#include "stepcast/lasso.hpp"
#include "stepcast/model_io.hpp"
#include "stepcast/pca.hpp"
#include "stepcast/pipeline.hpp"
#include "stepcast/svm.hpp"
#include "stepcast/synth.hpp"
#include "stepcast/tree.hpp"

namespace {

using nlohmann::json;
using stepcast::Error;
using stepcast::ErrorKind;

// Usage-shaped problems (bad flag values, missing required options) exit 1;
// data and validation problems surface as stepcast::Error and exit 2.
struct UsageFailure {
    std::string message;
};

[[noreturn]] void usage_fail(std::string message) { throw UsageFailure{std::move(message)}; }

// ---------------------------------------------------------------------------
// Small parsers shared by flags and config files.

int parse_int_strict(const std::string& text, const std::string& what) {
    int value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size())
        usage_fail(what + ": '" + text + "' is not an integer");
    return value;
}

double parse_double_strict(const std::string& text, const std::string& what) {
    if (text.empty()) usage_fail(what + ": empty number");
    char* end = nullptr;
    double value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) usage_fail(what + ": '" + text + "' is not a number");
    return value;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        parts.push_back(text.substr(start, comma - start));
        start = comma + 1;
    }
    return parts;
}

// "11-15,20" -> {11,12,13,14,15,20}; sorted, deduplicated, all within 0..23.
std::vector<int> parse_hours_list(const std::string& text) {
    std::vector<int> hours;
    for (const auto& token : split_list(text)) {
        if (token.empty()) usage_fail("--hours: empty entry in '" + text + "'");
        std::size_t dash = token.find('-', 1);  // position 0 would be a sign
        if (dash == std::string::npos) {
            hours.push_back(parse_int_strict(token, "--hours"));
        } else {
            int lo = parse_int_strict(token.substr(0, dash), "--hours");
            int hi = parse_int_strict(token.substr(dash + 1), "--hours");
            if (lo > hi) usage_fail("--hours: descending range '" + token + "'");
            for (int h = lo; h <= hi; ++h) hours.push_back(h);
        }
    }
    if (hours.empty()) usage_fail("--hours: no hours given");
    for (int h : hours)
        if (h < 0 || h > 23) usage_fail("--hours: hour " + std::to_string(h) + " outside 0..23");
    std::sort(hours.begin(), hours.end());
    hours.erase(std::unique(hours.begin(), hours.end()), hours.end());
    return hours;
}

struct Formats {
    bool csv = false;
    bool json = false;
};

Formats parse_formats(const std::string& text) {
    Formats formats;
    for (const auto& token : split_list(text)) {
        if (token == "csv")
            formats.csv = true;
        else if (token == "json")
            formats.json = true;
        else
            usage_fail("--formats: unknown format '" + token + "' (expected csv or json)");
    }
    return formats;
}

stepcast::bucketing::SplitRule parse_split_rule(const std::string& name) {
    if (name == "equal") return stepcast::bucketing::SplitRule::EqualPerBucket;
    if (name == "duration") return stepcast::bucketing::SplitRule::DurationWeighted;
    usage_fail("--split: unknown rule '" + name + "' (expected equal or duration)");
}

// ---------------------------------------------------------------------------
// Config file plumbing. A config JSON looks like the echo the CLI writes:
// {"command": "sweep", "options": {...}}. Its options become defaults that
// explicit flags override, so re-running with an echo reproduces the run.

const json* find_key(const json& options, const char* key) {
    auto it = options.find(key);
    return it == options.end() ? nullptr : &*it;
}

void get_value(const json& options, const char* key, bool& out) {
    if (const json* v = find_key(options, key)) {
        if (!v->is_boolean()) usage_fail(std::string("config option '") + key + "' must be a boolean");
        out = v->get<bool>();
    }
}

void get_value(const json& options, const char* key, int& out) {
    if (const json* v = find_key(options, key)) {
        if (!v->is_number_integer()) usage_fail(std::string("config option '") + key + "' must be an integer");
        out = v->get<int>();
    }
}

void get_value(const json& options, const char* key, std::uint32_t& out) {
    if (const json* v = find_key(options, key)) {
        if (!v->is_number_integer() || v->get<std::int64_t>() < 0)
            usage_fail(std::string("config option '") + key + "' must be a non-negative integer");
        out = v->get<std::uint32_t>();
    }
}

void get_value(const json& options, const char* key, std::uint64_t& out) {
    if (const json* v = find_key(options, key)) {
        if (!v->is_number_integer() && !v->is_number_unsigned())
            usage_fail(std::string("config option '") + key + "' must be an integer");
        out = v->get<std::uint64_t>();
    }
}

void get_value(const json& options, const char* key, double& out) {
    if (const json* v = find_key(options, key)) {
        if (!v->is_number()) usage_fail(std::string("config option '") + key + "' must be a number");
        out = v->get<double>();
    }
}

void get_value(const json& options, const char* key, std::string& out) {
    if (const json* v = find_key(options, key)) {
        if (!v->is_string()) usage_fail(std::string("config option '") + key + "' must be a string");
        out = v->get<std::string>();
    }
}

void get_value(const json& options, const char* key, std::vector<std::string>& out) {
    if (const json* v = find_key(options, key)) {
        if (!v->is_array()) usage_fail(std::string("config option '") + key + "' must be an array");
        std::vector<std::string> parsed;
        for (const auto& item : *v) {
            if (!item.is_string())
                usage_fail(std::string("config option '") + key + "' must hold strings");
            parsed.push_back(item.get<std::string>());
        }
        out = std::move(parsed);
    }
}

void get_value(const json& options, const char* key, std::vector<double>& out) {
    if (const json* v = find_key(options, key)) {
        if (!v->is_array()) usage_fail(std::string("config option '") + key + "' must be an array");
        std::vector<double> parsed;
        for (const auto& item : *v) {
            if (!item.is_number())
                usage_fail(std::string("config option '") + key + "' must hold numbers");
            parsed.push_back(item.get<double>());
        }
        out = std::move(parsed);
    }
}

// A shrink threshold is a number or null (null = no shrinkage); internally a
// negative sentinel stands for "none" so the flag stays a plain double.
void get_threshold(const json& options, const char* key, double& out) {
    if (const json* v = find_key(options, key)) {
        if (v->is_null()) {
            out = -1.0;
        } else if (v->is_number()) {
            out = v->get<double>();
        } else {
            usage_fail(std::string("config option '") + key + "' must be a number or null");
        }
    }
}

void check_known_keys(const json& options, std::initializer_list<const char*> known) {
    for (const auto& item : options.items()) {
        bool matched = false;
        for (const char* key : known)
            if (item.key() == key) {
                matched = true;
                break;
            }
        if (!matched) usage_fail("config option '" + item.key() + "' is not recognized here");
    }
}

struct LoadedConfig {
    std::string command;
    json options;
};

// Pre-scan argv for --config before CLI11 parses, so the file's options can
// seed the option defaults and explicit flags still win.
std::optional<LoadedConfig> scan_config(int argc, char** argv) {
    std::string path;
    std::string subcommand;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--config") {
            if (i + 1 >= argc) usage_fail("--config needs a file path");
            path = argv[++i];
        } else if (arg.rfind("--config=", 0) == 0) {
            path = arg.substr(9);
        } else if (subcommand.empty() && !arg.empty() && arg[0] != '-') {
            subcommand = arg;
        }
    }
    if (path.empty()) return std::nullopt;
    if (subcommand.empty()) usage_fail("--config needs a subcommand on the command line");
    std::string text;
    try {
        text = stepcast::ingest::read_file(path);
    } catch (const Error& e) {
        usage_fail(std::string("cannot read config: ") + e.what());
    }
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) usage_fail("config file must hold a JSON object");
    if (!doc.contains("command") || !doc.at("command").is_string())
        usage_fail("config file needs a 'command' string");
    std::string command = doc.at("command").get<std::string>();
    if (command != subcommand)
        usage_fail("config file is for '" + command + "' but '" + subcommand + "' was invoked");
    json options = doc.value("options", json::object());
    if (!options.is_object()) usage_fail("config 'options' must be an object");
    return LoadedConfig{std::move(command), std::move(options)};
}

void write_echo(const std::filesystem::path& directory, const std::string& command, json options) {
    json doc;
    doc["command"] = command;
    doc["options"] = std::move(options);
    std::filesystem::path dir = directory.empty() ? std::filesystem::path(".") : directory;
    stepcast::ingest::write_file_atomic(dir / "config_echo.json", doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Shared option groups.

std::string resolve_store(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("STEPCAST_STORE"); env != nullptr && *env != '\0') return env;
    usage_fail("no store path: pass --store or set STEPCAST_STORE");
}

void add_store_option(CLI::App* sub, std::string& store) {
    sub->add_option("--store", store, "Store directory (default: $STEPCAST_STORE)");
}

void add_config_option(CLI::App* sub, std::string& path) {
    sub->add_option("--config", path, "JSON config supplying option defaults; explicit flags win");
}

struct FeatureOptions {
    int cutoff = -1;
    std::string window = "all";  // all | last4
    bool cumulative = true;
    bool yesterday = true;
    bool weekday = true;
    bool place = false;
    std::string weather_path;  // empty = no weather columns
    std::uint32_t goal = 0;    // 0 = no override
};

void add_feature_options(CLI::App* sub, FeatureOptions& o, bool with_cutoff) {
    if (with_cutoff) sub->add_option("--cutoff", o.cutoff, "Cutoff hour (0..23)");
    sub->add_option("--window", o.window, "Feature window: all | last4");
    sub->add_flag("--cumulative,!--no-cumulative", o.cumulative, "Cumulative steps column");
    sub->add_flag("--yesterday,!--no-yesterday", o.yesterday, "Yesterday's total steps column");
    sub->add_flag("--weekday,!--no-weekday", o.weekday, "Day-of-week columns");
    sub->add_flag("--place,!--no-place", o.place, "Dominant-place columns");
    sub->add_option("--weather", o.weather_path, "Weather fixture CSV; enables weather columns");
    sub->add_option("--goal", o.goal, "Step-goal override applied to every user");
}

void apply_features(const json& options, FeatureOptions& o, bool with_cutoff) {
    if (with_cutoff) get_value(options, "cutoff", o.cutoff);
    get_value(options, "window", o.window);
    get_value(options, "cumulative", o.cumulative);
    get_value(options, "yesterday", o.yesterday);
    get_value(options, "weekday", o.weekday);
    get_value(options, "place", o.place);
    get_value(options, "weather", o.weather_path);
    get_value(options, "goal", o.goal);
}

void echo_features(json& options, const FeatureOptions& o, bool with_cutoff) {
    if (with_cutoff) options["cutoff"] = o.cutoff;
    options["window"] = o.window;
    options["cumulative"] = o.cumulative;
    options["yesterday"] = o.yesterday;
    options["weekday"] = o.weekday;
    options["place"] = o.place;
    options["weather"] = o.weather_path;
    options["goal"] = o.goal;
}

stepcast::features::FeatureConfig feature_config(const FeatureOptions& o, int cutoff_hour) {
    stepcast::features::FeatureConfig config;
    config.cutoff_hour = cutoff_hour;
    if (o.window == "all")
        config.window = stepcast::features::Window::AllHoursToCutoff;
    else if (o.window == "last4")
        config.window = stepcast::features::Window::Last4Hours;
    else
        usage_fail("--window: unknown window '" + o.window + "' (expected all or last4)");
    config.include_cumulative = o.cumulative;
    config.include_yesterday = o.yesterday;
    config.include_weekday = o.weekday;
    config.include_weather = !o.weather_path.empty();
    config.include_place = o.place;
    if (o.goal != 0) config.goal_override = o.goal;
    // The flags fully determine the config, so a validation failure here is a
    // usage error, not a data error.
    try {
        config.validate();
    } catch (const Error& e) {
        usage_fail(e.what());
    }
    return config;
}

std::optional<stepcast::bucketing::WeatherTable> load_weather(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return stepcast::bucketing::WeatherTable::load(path);
}

struct EvalOptions {
    int folds = 5;
    bool shuffled = false;
    std::uint64_t seed = 0;
    bool grouped = false;
};

void add_eval_options(CLI::App* sub, EvalOptions& o) {
    sub->add_option("--folds", o.folds, "Cross-validation fold count");
    sub->add_flag("--shuffled,!--no-shuffled", o.shuffled, "Shuffle rows before folding");
    sub->add_option("--seed", o.seed, "Seed for shuffling and seeded models");
    sub->add_flag("--grouped,!--no-grouped", o.grouped, "Assign folds per user instead of per row");
}

void apply_eval(const json& options, EvalOptions& o) {
    get_value(options, "folds", o.folds);
    get_value(options, "shuffled", o.shuffled);
    get_value(options, "seed", o.seed);
    get_value(options, "grouped", o.grouped);
}

void echo_eval(json& options, const EvalOptions& o) {
    options["folds"] = o.folds;
    options["shuffled"] = o.shuffled;
    options["seed"] = o.seed;
    options["grouped"] = o.grouped;
}

struct ModelOptions {
    double C = 1.0;
    std::string kernel = "linear";
    bool shrinking = true;
    double alpha = 1.0;
    std::string metric = "euclidean";
    double shrink_threshold = -1.0;  // negative = none
};

void add_model_options(CLI::App* sub, ModelOptions& o) {
    sub->add_option("--C", o.C, "SVM penalty parameter");
    sub->add_option("--kernel", o.kernel, "SVM kernel: linear | rbf | poly");
    sub->add_flag("--shrinking,!--no-shrinking", o.shrinking, "SVM active-set shrinking");
    sub->add_option("--alpha", o.alpha, "LASSO regularization strength");
    sub->add_option("--metric", o.metric, "Centroid metric: euclidean | cosine | manhattan");
    sub->add_option("--shrink-threshold", o.shrink_threshold,
                    "Centroid shrinkage threshold (negative = none)");
}

void apply_model(const json& options, ModelOptions& o) {
    get_value(options, "C", o.C);
    get_value(options, "kernel", o.kernel);
    get_value(options, "shrinking", o.shrinking);
    get_value(options, "alpha", o.alpha);
    get_value(options, "metric", o.metric);
    get_threshold(options, "shrink-threshold", o.shrink_threshold);
}

void echo_model(json& options, const ModelOptions& o) {
    options["C"] = o.C;
    options["kernel"] = o.kernel;
    options["shrinking"] = o.shrinking;
    options["alpha"] = o.alpha;
    options["metric"] = o.metric;
    if (o.shrink_threshold < 0)
        options["shrink-threshold"] = nullptr;
    else
        options["shrink-threshold"] = o.shrink_threshold;
}

stepcast::eval::ModelFamily parse_family(const std::string& name) {
    auto family = stepcast::eval::parse_model_family(name);
    if (!family) usage_fail("unknown model '" + name + "' (expected lasso, centroid, or svm)");
    return *family;
}

stepcast::eval::ModelSpec make_spec(const ModelOptions& o, stepcast::eval::ModelFamily family,
                                    std::uint64_t seed) {
    stepcast::eval::ModelSpec spec;
    spec.family = family;
    spec.alpha = o.alpha;
    spec.C = o.C;
    spec.shrinking = o.shrinking;
    auto kernel = stepcast::models::parse_kernel(o.kernel);
    if (!kernel) usage_fail("--kernel: unknown kernel '" + o.kernel + "'");
    spec.kernel = *kernel;
    auto metric = stepcast::models::parse_centroid_metric(o.metric);
    if (!metric) usage_fail("--metric: unknown metric '" + o.metric + "'");
    spec.metric = *metric;
    if (o.shrink_threshold >= 0) spec.shrink_threshold = o.shrink_threshold;
    spec.seed = seed;
    return spec;
}

stepcast::eval::FoldSpec make_folds(const stepcast::features::FeatureMatrix& matrix,
                                    const EvalOptions& ev) {
    if (ev.grouped) {
        std::vector<std::string> users;
        users.reserve(matrix.rows.size());
        for (const auto& row : matrix.rows) users.push_back(row.user_id);
        return stepcast::eval::kfold_grouped(users, ev.folds);
    }
    return stepcast::eval::kfold(matrix.rows.size(), ev.folds, ev.shuffled, ev.seed);
}

stepcast::eval::DatasetFingerprint fingerprint_of(const stepcast::features::FeatureMatrix& matrix) {
    stepcast::eval::DatasetFingerprint fp;
    fp.n_rows = matrix.rows.size();
    for (const auto& row : matrix.rows) fp.n_positive += row.y_class ? 1 : 0;
    fp.rows_dropped_no_history = matrix.diagnostics.rows_dropped_no_history;
    return fp;
}

// Fits the chosen family on every row (scaler included) for --save-model.
stepcast::models::PredictorBundle fit_full(const stepcast::features::FeatureMatrix& matrix,
                                             const stepcast::eval::ModelSpec& spec) {
    std::vector<std::size_t> all(matrix.rows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto scaler = stepcast::features::fit_scaler(matrix, all);
    auto X = matrix.design();
    scaler.apply(X);

    stepcast::models::PredictorBundle bundle;
    bundle.config = matrix.config;
    bundle.scaler = scaler;
    bundle.columns = matrix.schema.names;
    switch (spec.family) {
        case stepcast::eval::ModelFamily::Lasso:
            bundle.model = stepcast::models::lasso_fit(X, matrix.targets_reg(), spec.alpha);
            break;
        case stepcast::eval::ModelFamily::Centroid:
            bundle.model = stepcast::models::centroid_fit(X, matrix.labels(), spec.metric,
                                                          spec.shrink_threshold);
            break;
        case stepcast::eval::ModelFamily::Svm: {
            stepcast::models::SvmParams params;
            params.C = spec.C;
            params.shrinking = spec.shrinking;
            params.kernel = spec.kernel;
            params.seed = spec.seed;
            std::vector<int> y;
            y.reserve(matrix.rows.size());
            for (int label : matrix.labels()) y.push_back(label == 1 ? 1 : -1);
            bundle.model = stepcast::models::svm_fit(X, y, params);
            break;
        }
    }
    return bundle;
}

std::string format_score(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.8f", value);
    return buffer;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestOptions {
    std::vector<std::string> files;
    std::string store;
    bool overwrite = false;
};

void apply_ingest(const json& options, IngestOptions& o) {
    check_known_keys(options, {"files", "store", "overwrite"});
    get_value(options, "files", o.files);
    get_value(options, "store", o.store);
    get_value(options, "overwrite", o.overwrite);
}

json echo_ingest(const IngestOptions& o, const std::string& store) {
    json options;
    options["files"] = o.files;
    options["store"] = store;
    options["overwrite"] = o.overwrite;
    return options;
}

void run_ingest(const IngestOptions& o) {
    std::string store_path = resolve_store(o.store);
    if (o.files.empty()) usage_fail("ingest needs at least one input file");

    // Parse everything before storing anything: a malformed file aborts the
    // whole batch with the store untouched.
    std::vector<stepcast::ingest::RawDay> days;
    std::vector<stepcast::ingest::UserProfile> profiles;
    for (const auto& file : o.files) {
        try {
            std::string text = stepcast::ingest::read_file(file);
            json doc = json::parse(text, nullptr, false);
            if (doc.is_discarded())
                stepcast::fail(ErrorKind::MalformedDocument, "not valid JSON");
            auto dispatch_one = [&](const json& element) {
                if (!element.is_object())
                    stepcast::fail(ErrorKind::MalformedDocument, "array elements must be objects");
                std::string dumped = element.dump();
                if (element.contains("source"))
                    days.push_back(stepcast::ingest::parse_day(dumped));
                else
                    profiles.push_back(stepcast::ingest::parse_profile(dumped));
            };
            if (doc.is_array())
                for (const auto& element : doc) dispatch_one(element);
            else
                dispatch_one(doc);
        } catch (const Error& e) {
            std::string what = e.what();
            std::string prefix = std::string(stepcast::to_string(e.kind())) + ": ";
            if (what.rfind(prefix, 0) == 0) what = what.substr(prefix.size());
            stepcast::fail(e.kind(), file + ": " + what);
        }
    }

    stepcast::ingest::Store store{std::filesystem::path(store_path)};
    std::size_t stored = store.store_days(days, o.overwrite);
    for (const auto& profile : profiles) store.store_profile(profile, o.overwrite);
    std::cout << "stored " << stored << " day records and " << profiles.size() << " profiles in "
              << store_path << "\n";
    write_echo(store_path, "ingest", echo_ingest(o, store_path));
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
    int users = 80;
    int days = 60;
    std::uint64_t seed = 0;
    std::string format = "pedometer";
    std::string rhythm = "mixed";
    double hit_rate = 0.5;
    double base_min = 4000.0;
    double base_max = 16000.0;
    double weekday_mult = 1.1;
    std::string start_date = "2015-02-02";
    std::string out;
    std::string weather_out;
};

void apply_synth(const json& options, SynthOptions& o) {
    check_known_keys(options, {"users", "days", "seed", "format", "rhythm", "hit-rate", "base-min",
                               "base-max", "weekday-mult", "start-date", "out", "weather-out"});
    get_value(options, "users", o.users);
    get_value(options, "days", o.days);
    get_value(options, "seed", o.seed);
    get_value(options, "format", o.format);
    get_value(options, "rhythm", o.rhythm);
    get_value(options, "hit-rate", o.hit_rate);
    get_value(options, "base-min", o.base_min);
    get_value(options, "base-max", o.base_max);
    get_value(options, "weekday-mult", o.weekday_mult);
    get_value(options, "start-date", o.start_date);
    get_value(options, "out", o.out);
    get_value(options, "weather-out", o.weather_out);
}

json echo_synth(const SynthOptions& o) {
    json options;
    options["users"] = o.users;
    options["days"] = o.days;
    options["seed"] = o.seed;
    options["format"] = o.format;
    options["rhythm"] = o.rhythm;
    options["hit-rate"] = o.hit_rate;
    options["base-min"] = o.base_min;
    options["base-max"] = o.base_max;
    options["weekday-mult"] = o.weekday_mult;
    options["start-date"] = o.start_date;
    options["out"] = o.out;
    options["weather-out"] = o.weather_out;
    return options;
}

void run_synth(const SynthOptions& o) {
    if (o.out.empty()) usage_fail("synth needs --out (store directory to write)");

    stepcast::synth::CohortSpec spec;
    spec.n_users = o.users;
    spec.n_days = o.days;
    spec.seed = o.seed;
    auto format = stepcast::synth::parse_cohort_format(o.format);
    if (!format) usage_fail("--format: unknown format '" + o.format + "'");
    spec.format = *format;
    auto rhythm = stepcast::synth::parse_rhythm(o.rhythm);
    if (!rhythm) usage_fail("--rhythm: unknown rhythm '" + o.rhythm + "'");
    spec.rhythm = *rhythm;
    spec.goal_hit_rate_target = o.hit_rate;
    spec.base_rate_min = o.base_min;
    spec.base_rate_max = o.base_max;
    spec.weekday_multiplier = o.weekday_mult;
    auto start = stepcast::Date::parse(o.start_date);
    if (!start) usage_fail("--start-date: '" + o.start_date + "' is not a valid YYYY-MM-DD date");
    spec.start_date = *start;

    auto cohort = stepcast::synth::generate_cohort(spec);
    stepcast::ingest::Store store{std::filesystem::path(o.out)};
    store.store_days(cohort.days, /*overwrite=*/true);
    for (const auto& profile : cohort.profiles) store.store_profile(profile, /*overwrite=*/true);
    if (!o.weather_out.empty())
        stepcast::ingest::write_file_atomic(o.weather_out, stepcast::synth::weather_fixture_csv(spec));

    std::cout << "generated " << o.users << " users x " << o.days << " days (" << o.format
              << ") into " << o.out << "\n";
    write_echo(o.out, "synth", echo_synth(o));
}

// ---------------------------------------------------------------------------
// featurize

struct FeaturizeOptions {
    std::string store;
    std::string out;
    std::string split = "equal";
    FeatureOptions features;
};

void apply_featurize(const json& options, FeaturizeOptions& o) {
    check_known_keys(options, {"store", "out", "split", "cutoff", "window", "cumulative",
                               "yesterday", "weekday", "place", "weather", "goal"});
    get_value(options, "store", o.store);
    get_value(options, "out", o.out);
    get_value(options, "split", o.split);
    apply_features(options, o.features, /*with_cutoff=*/true);
}

json echo_featurize(const FeaturizeOptions& o, const std::string& store) {
    json options;
    options["store"] = store;
    options["out"] = o.out;
    options["split"] = o.split;
    echo_features(options, o.features, /*with_cutoff=*/true);
    return options;
}

void run_featurize(const FeaturizeOptions& o) {
    std::string store_path = resolve_store(o.store);
    if (o.out.empty()) usage_fail("featurize needs --out (CSV file to write)");
    if (o.features.cutoff < 0) usage_fail("featurize needs --cutoff");

    auto config = feature_config(o.features, o.features.cutoff);
    auto rule = parse_split_rule(o.split);
    auto weather = load_weather(o.features.weather_path);

    stepcast::ingest::Store store{std::filesystem::path(store_path)};
    auto loaded = stepcast::pipeline::load_hourly(store, weather, rule);
    auto matrix = stepcast::features::build_matrix(loaded.days, loaded.profiles, config);
    stepcast::ingest::write_file_atomic(o.out, stepcast::features::to_csv(matrix));

    std::cout << "wrote " << matrix.rows.size() << " rows x " << (matrix.schema.size() + 2)
              << " columns to " << o.out;
    if (matrix.diagnostics.rows_dropped_no_history > 0)
        std::cout << " (" << matrix.diagnostics.rows_dropped_no_history
                  << " rows dropped without history)";
    std::cout << "\n";
    write_echo(std::filesystem::path(o.out).parent_path(), "featurize", echo_featurize(o, store_path));
}

// ---------------------------------------------------------------------------
// select

struct SelectOptions {
    std::string store;
    std::string out;
    std::string hours = "11-15";
    std::uint64_t seed = 0;
    int trees = 10;
    double alpha = 1.0;
    int folds = 5;
    std::string split = "equal";
};

void apply_select(const json& options, SelectOptions& o) {
    check_known_keys(options, {"store", "out", "hours", "seed", "trees", "alpha", "folds", "split"});
    get_value(options, "store", o.store);
    get_value(options, "out", o.out);
    get_value(options, "hours", o.hours);
    get_value(options, "seed", o.seed);
    get_value(options, "trees", o.trees);
    get_value(options, "alpha", o.alpha);
    get_value(options, "folds", o.folds);
    get_value(options, "split", o.split);
}

json echo_select(const SelectOptions& o, const std::string& store) {
    json options;
    options["store"] = store;
    options["out"] = o.out;
    options["hours"] = o.hours;
    options["seed"] = o.seed;
    options["trees"] = o.trees;
    options["alpha"] = o.alpha;
    options["folds"] = o.folds;
    options["split"] = o.split;
    return options;
}

// Per cutoff hour: extra-trees importances, LASSO weights with a CV R^2, and
// PCA explained-variance ratios, over the hourly-bucket columns only. Rows
// with fewer columns than the widest hour leave the tail cells blank.
void run_select(const SelectOptions& o) {
    std::string store_path = resolve_store(o.store);
    if (o.out.empty()) usage_fail("select needs --out (directory to write)");
    auto hours = parse_hours_list(o.hours);
    auto rule = parse_split_rule(o.split);

    stepcast::ingest::Store store{std::filesystem::path(store_path)};
    auto loaded = stepcast::pipeline::load_hourly(store, std::nullopt, rule);

    int max_hour = hours.back();
    std::size_t max_cols = static_cast<std::size_t>(max_hour) + 1;

    std::vector<std::vector<double>> importance_rows;   // per hour, h+1 values
    std::vector<std::vector<double>> weight_rows;       // per hour, h+1 values
    std::vector<double> intercepts, cv_r2s;
    std::vector<std::vector<double>> variance_rows;     // per hour, component ratios
    std::size_t max_components = 0;

    for (int hour : hours) {
        stepcast::features::FeatureConfig config;
        config.cutoff_hour = hour;
        config.window = stepcast::features::Window::AllHoursToCutoff;
        config.include_cumulative = false;
        config.include_yesterday = false;
        config.include_weekday = false;

        auto matrix = stepcast::features::build_matrix(loaded.days, loaded.profiles, config);
        auto X = matrix.design();
        auto labels = matrix.labels();

        auto ensemble = stepcast::models::tree_importance(X, labels, o.trees, o.seed);
        importance_rows.push_back(ensemble.importances);

        auto standardized = matrix;
        stepcast::features::standardize(standardized);
        auto Xs = standardized.design();
        auto lasso = stepcast::models::lasso_fit(Xs, matrix.targets_reg(), o.alpha);
        weight_rows.push_back(lasso.weights);
        intercepts.push_back(lasso.intercept);

        stepcast::eval::ModelSpec spec;
        spec.family = stepcast::eval::ModelFamily::Lasso;
        spec.alpha = o.alpha;
        spec.seed = o.seed;
        auto folds = stepcast::eval::kfold(matrix.rows.size(), o.folds);
        cv_r2s.push_back(stepcast::eval::cv_score(matrix, spec, folds).mean_score);

        auto pca = stepcast::models::pca_fit(Xs, 10);
        variance_rows.push_back(pca.explained_variance_ratio);
        max_components = std::max(max_components, pca.explained_variance_ratio.size());
    }

    std::filesystem::create_directories(o.out);
    auto cell = [](double v) { return stepcast::format_double(v); };

    std::string importance_csv = "hour";
    for (std::size_t j = 0; j < max_cols; ++j) importance_csv += ",steps_h" + std::to_string(j);
    importance_csv += "\n";
    for (std::size_t i = 0; i < hours.size(); ++i) {
        importance_csv += std::to_string(hours[i]);
        for (std::size_t j = 0; j < max_cols; ++j)
            importance_csv += "," + (j < importance_rows[i].size() ? cell(importance_rows[i][j]) : "");
        importance_csv += "\n";
    }
    stepcast::ingest::write_file_atomic(std::filesystem::path(o.out) / "tree_importance.csv",
                                        importance_csv);

    std::string weights_csv = "hour,intercept";
    for (std::size_t j = 0; j < max_cols; ++j) weights_csv += ",steps_h" + std::to_string(j);
    weights_csv += ",cv_r2\n";
    for (std::size_t i = 0; i < hours.size(); ++i) {
        weights_csv += std::to_string(hours[i]) + "," + cell(intercepts[i]);
        for (std::size_t j = 0; j < max_cols; ++j)
            weights_csv += "," + (j < weight_rows[i].size() ? cell(weight_rows[i][j]) : "");
        weights_csv += "," + cell(cv_r2s[i]) + "\n";
    }
    stepcast::ingest::write_file_atomic(std::filesystem::path(o.out) / "lasso_weights.csv",
                                        weights_csv);

    std::string variance_csv = "hour";
    for (std::size_t j = 0; j < max_components; ++j) variance_csv += ",pc" + std::to_string(j + 1);
    variance_csv += "\n";
    for (std::size_t i = 0; i < hours.size(); ++i) {
        variance_csv += std::to_string(hours[i]);
        for (std::size_t j = 0; j < max_components; ++j)
            variance_csv += "," + (j < variance_rows[i].size() ? cell(variance_rows[i][j]) : "");
        variance_csv += "\n";
    }
    stepcast::ingest::write_file_atomic(std::filesystem::path(o.out) / "pca_variance.csv",
                                        variance_csv);

    std::cout << "wrote selection diagnostics for " << hours.size() << " cutoff hours to " << o.out
              << "\n";
    write_echo(o.out, "select", echo_select(o, store_path));
}

// ---------------------------------------------------------------------------
// eval

struct EvalCmdOptions {
    std::string store;
    std::string out;
    std::string model = "svm";
    std::string formats = "csv,json";
    std::string save_model;
    std::string split = "equal";
    FeatureOptions features;
    ModelOptions params;
    EvalOptions ev;
};

void apply_eval_cmd(const json& options, EvalCmdOptions& o) {
    check_known_keys(options,
                     {"store", "out", "model", "formats", "save-model", "split", "cutoff", "window",
                      "cumulative", "yesterday", "weekday", "place", "weather", "goal", "C",
                      "kernel", "shrinking", "alpha", "metric", "shrink-threshold", "folds",
                      "shuffled", "seed", "grouped"});
    get_value(options, "store", o.store);
    get_value(options, "out", o.out);
    get_value(options, "model", o.model);
    get_value(options, "formats", o.formats);
    get_value(options, "save-model", o.save_model);
    get_value(options, "split", o.split);
    apply_features(options, o.features, /*with_cutoff=*/true);
    apply_model(options, o.params);
    apply_eval(options, o.ev);
}

json echo_eval_cmd(const EvalCmdOptions& o, const std::string& store) {
    json options;
    options["store"] = store;
    options["out"] = o.out;
    options["model"] = o.model;
    options["formats"] = o.formats;
    options["save-model"] = o.save_model;
    options["split"] = o.split;
    echo_features(options, o.features, /*with_cutoff=*/true);
    echo_model(options, o.params);
    echo_eval(options, o.ev);
    return options;
}

void run_eval(const EvalCmdOptions& o) {
    std::string store_path = resolve_store(o.store);
    if (o.out.empty()) usage_fail("eval needs --out (directory to write)");
    if (o.features.cutoff < 0) usage_fail("eval needs --cutoff");
    auto family = parse_family(o.model);
    auto formats = parse_formats(o.formats);
    auto config = feature_config(o.features, o.features.cutoff);
    auto rule = parse_split_rule(o.split);
    auto weather = load_weather(o.features.weather_path);

    stepcast::ingest::Store store{std::filesystem::path(store_path)};
    auto loaded = stepcast::pipeline::load_hourly(store, weather, rule);
    auto matrix = stepcast::features::build_matrix(loaded.days, loaded.profiles, config);
    auto folds = make_folds(matrix, o.ev);
    auto spec = make_spec(o.params, family, o.ev.seed);
    auto report = stepcast::eval::cv_score(matrix, spec, folds);

    stepcast::eval::SweepReport wrapped;
    wrapped.rows = {report};
    wrapped.fingerprint = fingerprint_of(matrix);
    wrapped.config_template = config;
    wrapped.k = o.ev.folds;
    wrapped.shuffled = o.ev.shuffled;
    wrapped.seed = o.ev.seed;
    wrapped.grouped = o.ev.grouped;

    std::filesystem::create_directories(o.out);
    if (formats.csv)
        stepcast::ingest::write_file_atomic(std::filesystem::path(o.out) / "report.csv",
                                            stepcast::eval::sweep_to_csv(wrapped));
    if (formats.json)
        stepcast::ingest::write_file_atomic(std::filesystem::path(o.out) / "report.json",
                                            stepcast::eval::sweep_to_json(wrapped));

    if (!o.save_model.empty()) {
        auto bundle = fit_full(matrix, spec);
        stepcast::ingest::write_file_atomic(o.save_model,
                                            stepcast::models::serialize_bundle(bundle));
    }

    std::cout << "hour " << o.features.cutoff << " " << stepcast::eval::to_string(family) << " ("
              << spec.param_summary() << "): mean score " << format_score(report.mean_score)
              << " over " << o.ev.folds << " folds\n";
    if (!o.save_model.empty()) std::cout << "saved model bundle to " << o.save_model << "\n";
    write_echo(o.out, "eval", echo_eval_cmd(o, store_path));
}

// ---------------------------------------------------------------------------
// sweep

struct SweepCmdOptions {
    std::string store;
    std::string out;
    std::string hours = "11-15";
    std::string models = "svm";
    std::string formats = "csv,json";
    std::string split = "equal";
    int jobs = 1;
    FeatureOptions features;
    ModelOptions params;
    EvalOptions ev;
};

void apply_sweep(const json& options, SweepCmdOptions& o) {
    check_known_keys(options,
                     {"store", "out", "hours", "models", "formats", "split", "jobs", "window",
                      "cumulative", "yesterday", "weekday", "place", "weather", "goal", "C",
                      "kernel", "shrinking", "alpha", "metric", "shrink-threshold", "folds",
                      "shuffled", "seed", "grouped"});
    get_value(options, "store", o.store);
    get_value(options, "out", o.out);
    get_value(options, "hours", o.hours);
    get_value(options, "models", o.models);
    get_value(options, "formats", o.formats);
    get_value(options, "split", o.split);
    get_value(options, "jobs", o.jobs);
    apply_features(options, o.features, /*with_cutoff=*/false);
    apply_model(options, o.params);
    apply_eval(options, o.ev);
}

json echo_sweep(const SweepCmdOptions& o, const std::string& store) {
    json options;
    options["store"] = store;
    options["out"] = o.out;
    options["hours"] = o.hours;
    options["models"] = o.models;
    options["formats"] = o.formats;
    options["split"] = o.split;
    options["jobs"] = o.jobs;
    echo_features(options, o.features, /*with_cutoff=*/false);
    echo_model(options, o.params);
    echo_eval(options, o.ev);
    return options;
}

void run_sweep(const SweepCmdOptions& o) {
    std::string store_path = resolve_store(o.store);
    if (o.out.empty()) usage_fail("sweep needs --out (directory to write)");
    if (o.jobs < 1) usage_fail("--jobs must be at least 1");
    auto hours = parse_hours_list(o.hours);
    auto formats = parse_formats(o.formats);

    std::vector<stepcast::eval::ModelFamily> families;
    for (const auto& token : split_list(o.models)) {
        if (token.empty()) usage_fail("--models: empty entry");
        auto family = parse_family(token);
        for (auto seen : families)
            if (seen == family) usage_fail("--models: duplicate model '" + token + "'");
        families.push_back(family);
    }
    if (families.empty()) usage_fail("--models: no models given");

    auto config = feature_config(o.features, hours.front());
    if (config.window == stepcast::features::Window::Last4Hours && hours.front() < 3)
        usage_fail("--window last4 needs every hour to be at least 3");
    auto rule = parse_split_rule(o.split);
    auto weather = load_weather(o.features.weather_path);

    std::vector<stepcast::eval::ModelSpec> specs;
    specs.reserve(families.size());
    for (auto family : families) specs.push_back(make_spec(o.params, family, o.ev.seed));

    stepcast::ingest::Store store{std::filesystem::path(store_path)};
    auto loaded = stepcast::pipeline::load_hourly(store, weather, rule);
    auto report = stepcast::eval::hourly_sweep(loaded.days, loaded.profiles, hours, specs, config,
                                               o.ev.folds, o.ev.shuffled, o.ev.seed, o.ev.grouped,
                                               o.jobs);

    std::filesystem::create_directories(o.out);
    if (formats.csv)
        stepcast::ingest::write_file_atomic(std::filesystem::path(o.out) / "sweep.csv",
                                            stepcast::eval::sweep_to_csv(report));
    if (formats.json)
        stepcast::ingest::write_file_atomic(std::filesystem::path(o.out) / "sweep.json",
                                            stepcast::eval::sweep_to_json(report));

    const stepcast::eval::CVReport* best = nullptr;
    for (const auto& row : report.rows)
        if (best == nullptr || row.mean_score > best->mean_score) best = &row;
    std::cout << "swept " << hours.size() << " hours x " << specs.size() << " models (" << o.ev.folds
              << " folds) into " << o.out << "\n";
    if (best != nullptr)
        std::cout << "best: hour " << best->cutoff_hour << " "
                  << stepcast::eval::to_string(best->model_spec.family) << " ("
                  << best->model_spec.param_summary() << ") mean " << format_score(best->mean_score)
                  << "\n";
    write_echo(o.out, "sweep", echo_sweep(o, store_path));
}

// ---------------------------------------------------------------------------
// gridsearch

struct GridCmdOptions {
    std::string store;
    std::string out;
    std::string model = "svm";
    std::string formats = "csv,json";
    std::string split = "equal";
    std::vector<double> c_grid;
    std::vector<std::string> kernel_grid;
    std::vector<std::string> shrinking_grid;
    std::vector<std::string> metric_grid;
    std::vector<std::string> shrink_grid;
    std::vector<double> alpha_grid;
    FeatureOptions features;
    EvalOptions ev;
};

void apply_grid(const json& options, GridCmdOptions& o) {
    check_known_keys(options, {"store", "out", "model", "formats", "split", "C-grid", "kernel-grid",
                               "shrinking-grid", "metric-grid", "shrink-grid", "alpha-grid",
                               "cutoff", "window", "cumulative", "yesterday", "weekday", "place",
                               "weather", "goal", "folds", "shuffled", "seed", "grouped"});
    get_value(options, "store", o.store);
    get_value(options, "out", o.out);
    get_value(options, "model", o.model);
    get_value(options, "formats", o.formats);
    get_value(options, "split", o.split);
    get_value(options, "C-grid", o.c_grid);
    get_value(options, "kernel-grid", o.kernel_grid);
    get_value(options, "shrinking-grid", o.shrinking_grid);
    get_value(options, "metric-grid", o.metric_grid);
    get_value(options, "shrink-grid", o.shrink_grid);
    get_value(options, "alpha-grid", o.alpha_grid);
    apply_features(options, o.features, /*with_cutoff=*/true);
    apply_eval(options, o.ev);
}

json echo_grid(const GridCmdOptions& o, const std::string& store) {
    json options;
    options["store"] = store;
    options["out"] = o.out;
    options["model"] = o.model;
    options["formats"] = o.formats;
    options["split"] = o.split;
    options["C-grid"] = o.c_grid;
    options["kernel-grid"] = o.kernel_grid;
    options["shrinking-grid"] = o.shrinking_grid;
    options["metric-grid"] = o.metric_grid;
    options["shrink-grid"] = o.shrink_grid;
    options["alpha-grid"] = o.alpha_grid;
    echo_features(options, o.features, /*with_cutoff=*/true);
    echo_eval(options, o.ev);
    return options;
}

void run_grid(const GridCmdOptions& o) {
    std::string store_path = resolve_store(o.store);
    if (o.out.empty()) usage_fail("gridsearch needs --out (directory to write)");
    if (o.features.cutoff < 0) usage_fail("gridsearch needs --cutoff");
    auto family = parse_family(o.model);
    auto formats = parse_formats(o.formats);

    stepcast::eval::ParamGrid grid;
    grid.C = o.c_grid;
    for (const auto& name : o.kernel_grid) {
        auto kernel = stepcast::models::parse_kernel(name);
        if (!kernel) usage_fail("--kernel-grid: unknown kernel '" + name + "'");
        grid.kernels.push_back(*kernel);
    }
    for (const auto& name : o.shrinking_grid) {
        if (name == "true")
            grid.shrinking.push_back(true);
        else if (name == "false")
            grid.shrinking.push_back(false);
        else
            usage_fail("--shrinking-grid: '" + name + "' is not true or false");
    }
    for (const auto& name : o.metric_grid) {
        auto metric = stepcast::models::parse_centroid_metric(name);
        if (!metric) usage_fail("--metric-grid: unknown metric '" + name + "'");
        grid.metrics.push_back(*metric);
    }
    for (const auto& name : o.shrink_grid) {
        if (name == "none")
            grid.shrink_thresholds.push_back(std::nullopt);
        else
            grid.shrink_thresholds.push_back(parse_double_strict(name, "--shrink-grid"));
    }
    grid.alphas = o.alpha_grid;

    switch (family) {
        case stepcast::eval::ModelFamily::Svm:
            if (grid.C.empty() && grid.kernels.empty() && grid.shrinking.empty())
                usage_fail("gridsearch over svm needs --C-grid, --kernel-grid, or --shrinking-grid");
            break;
        case stepcast::eval::ModelFamily::Centroid:
            if (grid.metrics.empty() && grid.shrink_thresholds.empty())
                usage_fail("gridsearch over centroid needs --metric-grid or --shrink-grid");
            break;
        case stepcast::eval::ModelFamily::Lasso:
            if (grid.alphas.empty()) usage_fail("gridsearch over lasso needs --alpha-grid");
            break;
    }

    auto config = feature_config(o.features, o.features.cutoff);
    auto rule = parse_split_rule(o.split);
    auto weather = load_weather(o.features.weather_path);

    stepcast::ingest::Store store{std::filesystem::path(store_path)};
    auto loaded = stepcast::pipeline::load_hourly(store, weather, rule);
    auto matrix = stepcast::features::build_matrix(loaded.days, loaded.profiles, config);
    auto folds = make_folds(matrix, o.ev);
    auto report = stepcast::eval::grid_search(matrix, family, grid, folds);

    std::filesystem::create_directories(o.out);
    if (formats.csv)
        stepcast::ingest::write_file_atomic(std::filesystem::path(o.out) / "grid.csv",
                                            stepcast::eval::grid_to_csv(report, o.ev.folds));
    if (formats.json)
        stepcast::ingest::write_file_atomic(std::filesystem::path(o.out) / "grid.json",
                                            stepcast::eval::grid_to_json(report));

    const auto& best = report.rows[report.best_index];
    std::cout << "searched " << report.rows.size() << " cells; best "
              << stepcast::eval::to_string(family) << " (" << best.model_spec.param_summary()
              << ") mean " << format_score(best.mean_score) << "\n";
    write_echo(o.out, "gridsearch", echo_grid(o, store_path));
}

// ---------------------------------------------------------------------------
// predict

struct PredictOptions {
    std::string model_file;
    std::string day_file;
    std::string yesterday_file;
    std::string weather_path;
    std::string out;
    std::string split = "equal";
    int cutoff = -1;  // negative = keep the bundle's cutoff
};

void apply_predict(const json& options, PredictOptions& o) {
    check_known_keys(options, {"model", "day", "yesterday", "weather", "out", "split", "cutoff"});
    get_value(options, "model", o.model_file);
    get_value(options, "day", o.day_file);
    get_value(options, "yesterday", o.yesterday_file);
    get_value(options, "weather", o.weather_path);
    get_value(options, "out", o.out);
    get_value(options, "split", o.split);
    get_value(options, "cutoff", o.cutoff);
}

json echo_predict(const PredictOptions& o) {
    json options;
    options["model"] = o.model_file;
    options["day"] = o.day_file;
    options["yesterday"] = o.yesterday_file;
    options["weather"] = o.weather_path;
    options["out"] = o.out;
    options["split"] = o.split;
    options["cutoff"] = o.cutoff;
    return options;
}

void run_predict(const PredictOptions& o) {
    if (o.model_file.empty()) usage_fail("predict needs --model (a saved model bundle)");
    if (o.day_file.empty()) usage_fail("predict needs --day (a raw day JSON file)");

    auto bundle = stepcast::models::deserialize_bundle(stepcast::ingest::read_file(o.model_file));
    auto config = bundle.config;
    if (o.cutoff >= 0) {
        config.cutoff_hour = o.cutoff;
        try {
            config.validate();
        } catch (const Error& e) {
            usage_fail(e.what());
        }
    }
    auto rule = parse_split_rule(o.split);

    std::vector<stepcast::bucketing::HourlyDay> days;
    auto target = stepcast::ingest::parse_day(stepcast::ingest::read_file(o.day_file));
    if (!o.yesterday_file.empty())
        days.push_back(stepcast::bucketing::to_hourly(
            stepcast::ingest::parse_day(stepcast::ingest::read_file(o.yesterday_file)), rule));
    days.push_back(stepcast::bucketing::to_hourly(target, rule));
    if (config.include_weather) {
        if (auto weather = load_weather(o.weather_path))
            for (auto& day : days) day = stepcast::bucketing::attach_weather(std::move(day), *weather);
    }

    auto matrix = stepcast::features::build_matrix(days, {}, config);
    const stepcast::features::FeatureRow* scored = nullptr;
    for (const auto& row : matrix.rows)
        if (row.user_id == stepcast::ingest::raw_day_user(target) &&
            row.date == stepcast::ingest::raw_day_date(target))
            scored = &row;
    if (scored == nullptr) {
        if (config.include_yesterday)
            stepcast::fail(ErrorKind::InvalidValue,
                           "the model uses yesterday's total: pass --yesterday with the calendar "
                           "day before --day for the same user");
        stepcast::fail(ErrorKind::NoData, "no scorable row built from the given day");
    }
    if (matrix.schema.names != bundle.columns)
        stepcast::fail(ErrorKind::DimensionMismatch,
                       "day features do not match the model's training columns");

    stepcast::Matrix X{1, scored->x.size()};
    X.data = scored->x;
    bundle.scaler.apply(X);
    auto x = X.row(0);

    json result;
    result["user"] = scored->user_id;
    result["date"] = scored->date.to_string();
    result["cutoff_hour"] = config.cutoff_hour;
    result["model"] = stepcast::models::model_type_name(bundle.model);
    std::visit(
        [&](const auto& model) {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, stepcast::models::LassoModel>) {
                double predicted = stepcast::models::lasso_predict(model, x);
                std::uint32_t goal = stepcast::features::resolve_goal(nullptr, config);
                result["predicted_steps"] = predicted;
                result["goal"] = goal;
                result["goal_achieved"] = predicted >= static_cast<double>(goal);
            } else if constexpr (std::is_same_v<T, stepcast::models::SvmModel>) {
                double margin = stepcast::models::svm_decision(model, x);
                result["margin"] = margin;
                result["goal_achieved"] = margin >= 0.0;
            } else if constexpr (std::is_same_v<T, stepcast::models::CentroidModel>) {
                result["goal_achieved"] = stepcast::models::centroid_predict(model, x) == 1;
            } else if constexpr (std::is_same_v<T, stepcast::models::TreeEnsembleModel>) {
                result["goal_achieved"] = stepcast::models::tree_predict(model, x) == 1;
            } else {
                stepcast::fail(ErrorKind::InvalidValue, "this bundle does not hold a predictor");
            }
        },
        bundle.model);

    std::string text = result.dump(2) + "\n";
    std::cout << text;
    if (!o.out.empty()) {
        stepcast::ingest::write_file_atomic(o.out, text);
        write_echo(std::filesystem::path(o.out).parent_path(), "predict", echo_predict(o));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stepcast: hourly step-goal forecasting over activity-tracker logs"};
    app.require_subcommand(1);

    IngestOptions ingest_opts;
    SynthOptions synth_opts;
    FeaturizeOptions featurize_opts;
    SelectOptions select_opts;
    EvalCmdOptions eval_opts;
    SweepCmdOptions sweep_opts;
    GridCmdOptions grid_opts;
    PredictOptions predict_opts;
    std::string config_path;  // shared sink; the pre-scan does the real work

    auto* ingest_cmd = app.add_subcommand("ingest", "Parse day/profile JSON files into the store");
    ingest_cmd->add_option("files", ingest_opts.files, "Day or profile JSON files");
    add_store_option(ingest_cmd, ingest_opts.store);
    ingest_cmd->add_flag("--overwrite", ingest_opts.overwrite, "Replace conflicting documents");
    add_config_option(ingest_cmd, config_path);

    auto* synth_cmd = app.add_subcommand("synth", "Generate a deterministic synthetic cohort");
    synth_cmd->add_option("--users", synth_opts.users, "Number of users");
    synth_cmd->add_option("--days", synth_opts.days, "Days per user");
    synth_cmd->add_option("--seed", synth_opts.seed, "Cohort seed");
    synth_cmd->add_option("--format", synth_opts.format, "Day format: pedometer | storyline");
    synth_cmd->add_option("--rhythm", synth_opts.rhythm,
                          "Rhythm mix: commuter | homebody | athlete | mixed");
    synth_cmd->add_option("--hit-rate", synth_opts.hit_rate, "Target goal-hit rate in (0,1)");
    synth_cmd->add_option("--base-min", synth_opts.base_min, "Minimum base steps/day");
    synth_cmd->add_option("--base-max", synth_opts.base_max, "Maximum base steps/day");
    synth_cmd->add_option("--weekday-mult", synth_opts.weekday_mult, "Weekday activity multiplier");
    synth_cmd->add_option("--start-date", synth_opts.start_date, "First day (YYYY-MM-DD)");
    synth_cmd->add_option("--out", synth_opts.out, "Store directory to write");
    synth_cmd->add_option("--weather-out", synth_opts.weather_out, "Also write a weather fixture CSV");
    add_config_option(synth_cmd, config_path);

    auto* featurize_cmd = app.add_subcommand("featurize", "Emit the labeled feature matrix as CSV");
    add_store_option(featurize_cmd, featurize_opts.store);
    featurize_cmd->add_option("--out", featurize_opts.out, "CSV file to write");
    featurize_cmd->add_option("--split", featurize_opts.split,
                              "Multi-hour segment split rule: equal | duration");
    add_feature_options(featurize_cmd, featurize_opts.features, /*with_cutoff=*/true);
    add_config_option(featurize_cmd, config_path);

    auto* select_cmd =
        app.add_subcommand("select", "Feature diagnostics: tree importances, LASSO, PCA");
    add_store_option(select_cmd, select_opts.store);
    select_cmd->add_option("--out", select_opts.out, "Directory to write the three CSV tables");
    select_cmd->add_option("--hours", select_opts.hours, "Cutoff hours, e.g. 11-15 or 9,12,15");
    select_cmd->add_option("--seed", select_opts.seed, "Tree ensemble seed");
    select_cmd->add_option("--trees", select_opts.trees, "Trees per ensemble");
    select_cmd->add_option("--alpha", select_opts.alpha, "LASSO regularization strength");
    select_cmd->add_option("--folds", select_opts.folds, "Folds for the LASSO CV score");
    select_cmd->add_option("--split", select_opts.split,
                           "Multi-hour segment split rule: equal | duration");
    add_config_option(select_cmd, config_path);

    auto* eval_cmd = app.add_subcommand("eval", "Cross-validate one model at one cutoff hour");
    add_store_option(eval_cmd, eval_opts.store);
    eval_cmd->add_option("--out", eval_opts.out, "Directory for report.csv / report.json");
    eval_cmd->add_option("--model", eval_opts.model, "Model family: lasso | centroid | svm");
    eval_cmd->add_option("--formats", eval_opts.formats, "Outputs to write: csv,json");
    eval_cmd->add_option("--save-model", eval_opts.save_model,
                         "Also fit on all rows and save a predictor bundle here");
    eval_cmd->add_option("--split", eval_opts.split,
                         "Multi-hour segment split rule: equal | duration");
    add_feature_options(eval_cmd, eval_opts.features, /*with_cutoff=*/true);
    add_model_options(eval_cmd, eval_opts.params);
    add_eval_options(eval_cmd, eval_opts.ev);
    add_config_option(eval_cmd, config_path);

    auto* sweep_cmd = app.add_subcommand("sweep", "Cross-validate models across cutoff hours");
    add_store_option(sweep_cmd, sweep_opts.store);
    sweep_cmd->add_option("--out", sweep_opts.out, "Directory for sweep.csv / sweep.json");
    sweep_cmd->add_option("--hours", sweep_opts.hours, "Cutoff hours, e.g. 11-15 or 9,12,15");
    sweep_cmd->add_option("--models", sweep_opts.models, "Comma list of: lasso, centroid, svm");
    sweep_cmd->add_option("--formats", sweep_opts.formats, "Outputs to write: csv,json");
    sweep_cmd->add_option("--jobs", sweep_opts.jobs, "Hours evaluated in parallel");
    sweep_cmd->add_option("--split", sweep_opts.split,
                          "Multi-hour segment split rule: equal | duration");
    add_feature_options(sweep_cmd, sweep_opts.features, /*with_cutoff=*/false);
    add_model_options(sweep_cmd, sweep_opts.params);
    add_eval_options(sweep_cmd, sweep_opts.ev);
    add_config_option(sweep_cmd, config_path);

    auto* grid_cmd = app.add_subcommand("gridsearch", "Exhaustive hyperparameter search");
    add_store_option(grid_cmd, grid_opts.store);
    grid_cmd->add_option("--out", grid_opts.out, "Directory for grid.csv / grid.json");
    grid_cmd->add_option("--model", grid_opts.model, "Model family: lasso | centroid | svm");
    grid_cmd->add_option("--formats", grid_opts.formats, "Outputs to write: csv,json");
    grid_cmd->add_option("--split", grid_opts.split,
                         "Multi-hour segment split rule: equal | duration");
    grid_cmd->add_option("--C-grid", grid_opts.c_grid, "SVM C values")->delimiter(',');
    grid_cmd->add_option("--kernel-grid", grid_opts.kernel_grid, "SVM kernels")->delimiter(',');
    grid_cmd->add_option("--shrinking-grid", grid_opts.shrinking_grid, "SVM shrinking: true,false")
        ->delimiter(',');
    grid_cmd->add_option("--metric-grid", grid_opts.metric_grid, "Centroid metrics")->delimiter(',');
    grid_cmd->add_option("--shrink-grid", grid_opts.shrink_grid,
                         "Centroid shrink thresholds ('none' allowed)")
        ->delimiter(',');
    grid_cmd->add_option("--alpha-grid", grid_opts.alpha_grid, "LASSO alphas")->delimiter(',');
    add_feature_options(grid_cmd, grid_opts.features, /*with_cutoff=*/true);
    add_eval_options(grid_cmd, grid_opts.ev);
    add_config_option(grid_cmd, config_path);

    auto* predict_cmd = app.add_subcommand("predict", "Score one raw day with a saved bundle");
    predict_cmd->add_option("--model", predict_opts.model_file, "Saved predictor bundle JSON");
    predict_cmd->add_option("--day", predict_opts.day_file, "Raw day JSON to score");
    predict_cmd->add_option("--yesterday", predict_opts.yesterday_file,
                            "Previous day's raw JSON (needed when the model uses it)");
    predict_cmd->add_option("--weather", predict_opts.weather_path, "Weather fixture CSV");
    predict_cmd->add_option("--out", predict_opts.out, "Also write the prediction JSON here");
    predict_cmd->add_option("--split", predict_opts.split,
                            "Multi-hour segment split rule: equal | duration");
    predict_cmd->add_option("--cutoff", predict_opts.cutoff,
                            "Override the bundle's cutoff hour (last4 window only)");
    add_config_option(predict_cmd, config_path);

    try {
        auto config = scan_config(argc, argv);
        if (config) {
            if (config->command == "ingest")
                apply_ingest(config->options, ingest_opts);
            else if (config->command == "synth")
                apply_synth(config->options, synth_opts);
            else if (config->command == "featurize")
                apply_featurize(config->options, featurize_opts);
            else if (config->command == "select")
                apply_select(config->options, select_opts);
            else if (config->command == "eval")
                apply_eval_cmd(config->options, eval_opts);
            else if (config->command == "sweep")
                apply_sweep(config->options, sweep_opts);
            else if (config->command == "gridsearch")
                apply_grid(config->options, grid_opts);
            else if (config->command == "predict")
                apply_predict(config->options, predict_opts);
            else
                usage_fail("config file names unknown command '" + config->command + "'");
        }

        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            return 1;
        }

        if (ingest_cmd->parsed())
            run_ingest(ingest_opts);
        else if (synth_cmd->parsed())
            run_synth(synth_opts);
        else if (featurize_cmd->parsed())
            run_featurize(featurize_opts);
        else if (select_cmd->parsed())
            run_select(select_opts);
        else if (eval_cmd->parsed())
            run_eval(eval_opts);
        else if (sweep_cmd->parsed())
            run_sweep(sweep_opts);
        else if (grid_cmd->parsed())
            run_grid(grid_opts);
        else if (predict_cmd->parsed())
            run_predict(predict_opts);
    } catch (const UsageFailure& failure) {
        std::cerr << "usage error: " << failure.message << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::UnsupportedKernel ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
