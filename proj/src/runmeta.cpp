#include "lagdyn/runmeta.hpp"

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "lagdyn/errors.hpp"

namespace lagdyn::io {

void write_key_values(const std::string& path, const KeyValues& kv) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
    if (!os) throw DataError("write to '" + path + "' failed");
}

std::string timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::string output_root() {
    const char* env = std::getenv("LAGDYN_OUT");
    return env && *env ? env : "runs";
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw DataError("cannot create directory '" + path + "': " + ec.message());
}

} // namespace lagdyn::io
