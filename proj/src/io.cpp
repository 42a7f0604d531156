#include "oamqkd/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace oamqkd {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
        throw ConfigError(what + ": '" + text + "' is not a number");
    }
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& origin) {
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (cfg.values_.contains(key)) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

Config Config::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in, path.string());
}

void Config::set(const std::string& key, const std::string& value) { values_[trim(key)] = trim(value); }

bool Config::contains(const std::string& key) const { return values_.contains(key); }

std::optional<std::string> Config::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? parse_double(*v, key) : fallback;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    const std::string t = trim(*v);
    char* end = nullptr;
    errno = 0;
    const auto parsed = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || t.front() == '-' || end != t.c_str() + t.size() || errno == ERANGE) {
        throw ConfigError(key + ": '" + *v + "' is not a non-negative integer");
    }
    return parsed;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(key + ": '" + *v + "' is not a boolean");
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::vector<double> out;
    if (trim(*v).empty()) return out;
    for (const auto& cell : split(*v, ',')) out.push_back(parse_double(cell, key));
    return out;
}

double Config::require_double(const std::string& key) const {
    if (!contains(key)) throw ConfigError("missing required key '" + key + "'");
    return get_double(key, 0.0);
}

void Config::reject_unused() const {
    std::string unknown;
    for (const auto& [k, v] : values_) {
        if (!used_.contains(k)) unknown += (unknown.empty() ? "" : ", ") + k;
    }
    if (!unknown.empty()) throw ConfigError("unknown configuration keys: " + unknown);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot create " + tmp.string());
        try {
            writer(out);
            out.flush();
        } catch (...) {
            out.close();
            std::filesystem::remove(tmp);
            throw;
        }
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw std::runtime_error("failed writing " + path.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

void write_session_csv(std::ostream& out, std::span<const BlockTally> blocks) {
    out << "block_index,class,sent,detected,sifted,errors,gain,qber\n";
    for (const auto& b : blocks) {
        for (std::size_t c = 0; c < kIntensityClasses; ++c) {
            const auto& t = b.classes[c];
            out << b.index << ',' << to_string(static_cast<IntensityClass>(c)) << ',' << t.sent << ','
                << t.detected << ',' << t.sifted << ',' << t.errors << ',' << format_double(t.gain()) << ','
                << format_double(t.qber()) << '\n';
        }
    }
}

void write_observables(std::ostream& out, const DecoyObservables& obs) {
    out << "mu=" << format_double(obs.mu) << '\n'
        << "nu=" << format_double(obs.nu) << '\n'
        << "q_mu=" << format_double(obs.q_mu) << '\n'
        << "e_mu=" << format_double(obs.e_mu) << '\n'
        << "q_nu=" << format_double(obs.q_nu) << '\n'
        << "e_nu=" << format_double(obs.e_nu) << '\n'
        << "y0=" << format_double(obs.y0) << '\n';
}

DecoyObservables observables_from_config(const Config& cfg, const std::string& prefix) {
    const auto req = [&](const char* k) { return cfg.require_double(prefix + k); };
    return DecoyObservables{req("mu"), req("nu"), req("q_mu"), req("q_nu"), req("e_mu"), req("e_nu"), req("y0")};
}

void write_keyrate_header(std::ostream& out) { out << "q1_lower,e1_upper,q0,leak_ec,rate,secure\n"; }

void write_keyrate_row(std::ostream& out, const KeyRateBreakdown& k) {
    out << format_double(k.q1_lower) << ',' << format_double(k.e1_upper) << ',' << format_double(k.q0) << ','
        << format_double(k.leak_ec) << ',' << format_double(k.rate) << ',' << (k.secure ? "true" : "false")
        << '\n';
}

void write_sweep_csv(std::ostream& out, std::span<const RatePoint> curve) {
    out << "q_mu,e_mu_star,e_nu_star,q1_lower,e1_upper,rate,secure\n";
    for (const auto& p : curve) {
        out << format_double(p.q_mu) << ',' << format_double(p.e_mu_star) << ',' << format_double(p.e_nu_star)
            << ',' << format_double(p.keyrate.q1_lower) << ',' << format_double(p.keyrate.e1_upper) << ','
            << format_double(p.keyrate.rate) << ',' << (p.keyrate.secure ? "true" : "false") << '\n';
    }
}

void write_centroids_csv(std::ostream& out, std::span<const CentroidSample> samples) {
    out << "frame_index,x_mm,y_mm\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out << i << ',' << format_double(samples[i].x_mm) << ',' << format_double(samples[i].y_mm) << '\n';
    }
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("CSV is missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty() || trim(line).front() == '#') continue;
        auto cells = split(trim(line), ',');
        if (table.header.empty()) {
            table.header = std::move(cells);
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    if (table.header.empty()) throw ConfigError("CSV has no header row");
    return table;
}

std::vector<DecoyObservables> observables_from_csv(const CsvTable& table) {
    const std::size_t cols[] = {table.column("mu"),   table.column("nu"),   table.column("q_mu"),
                                table.column("q_nu"), table.column("e_mu"), table.column("e_nu"),
                                table.column("y0")};
    std::vector<DecoyObservables> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = "row " + std::to_string(r + 1);
        if (row.size() != table.header.size()) {
            throw ConfigError(where + ": expected " + std::to_string(table.header.size()) + " fields, found " +
                              std::to_string(row.size()));
        }
        double v[7];
        for (int i = 0; i < 7; ++i) v[i] = parse_double(row[cols[i]], where + " column " + table.header[cols[i]]);
        out.push_back(DecoyObservables{v[0], v[1], v[2], v[3], v[4], v[5], v[6]});
    }
    return out;
}

}  // namespace oamqkd
