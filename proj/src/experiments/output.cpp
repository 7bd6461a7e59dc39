#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>

#include "akin/errors.hpp"
#include "akin/experiments.hpp"

namespace akin {

using nlohmann::json;

namespace {

// Shortest decimal that parses back to the same double.
void append_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << text;
    out.close();
    if (!out) {
        throw ConfigError("failed writing " + path.string());
    }
}

}  // namespace

Check check_range(std::string name, double measured, std::optional<double> lower, std::optional<double> upper) {
    Check c{std::move(name), measured, lower, upper, false};
    c.pass = std::isfinite(measured) && (!lower || measured >= *lower) && (!upper || measured <= *upper);
    return c;
}

bool Report::passed() const {
    for (const auto& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

json Report::to_json() const {
    json out = json::object();
    out["experiment"] = experiment;
    out["master_seed"] = master_seed;
    out["config_hash"] = config_hash;
    json list = json::array();
    json failures = json::array();
    for (const auto& c : checks) {
        list.push_back({{"name", c.name},
                        {"measured", std::isfinite(c.measured) ? json(c.measured) : json(nullptr)},
                        {"tolerance", {{"lower", optional_number(c.lower)}, {"upper", optional_number(c.upper)}}},
                        {"pass", c.pass}});
        if (!c.pass) {
            failures.push_back({{"name", c.name},
                                {"measured", std::isfinite(c.measured) ? json(c.measured) : json(nullptr)}});
        }
    }
    out["checks"] = std::move(list);
    out["failures"] = std::move(failures);
    out["pass"] = passed();
    out["summary"] = summary;
    return out;
}

std::string trajectory_csv(const PathBundle& path) {
    std::string out = "t,S,X,Y,U,M,A\n";
    out.reserve(out.size() + path.size() * 7 * 24);
    for (std::size_t i = 0; i < path.size(); ++i) {
        for (const double v : {path.t[i], path.S[i], path.X[i], path.Y[i], path.U[i], path.M[i]}) {
            append_double(out, v);
            out += ',';
        }
        append_double(out, path.A[i]);
        out += '\n';
    }
    return out;
}

std::string samples_csv(std::span<const double> values) {
    std::string out = "value\n";
    out.reserve(out.size() + values.size() * 24);
    for (const double v : values) {
        append_double(out, v);
        out += '\n';
    }
    return out;
}

void write_artifacts(const ExperimentResult& result, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
    }
    const fs::path root(dir);
    for (const auto& path : result.trajectories) {
        write_file(root / ("trajectory_" + std::to_string(path.stream_id) + ".csv"), trajectory_csv(path));
    }
    for (const auto& set : result.samples) {
        write_file(root / ("samples_" + set.name + ".csv"), samples_csv(set.values));
    }
    write_file(root / "report.json", result.report.to_json().dump(2) + "\n");
}

}  // namespace akin
