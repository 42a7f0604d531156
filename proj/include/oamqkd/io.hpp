// io.hpp
// Flat key=value configuration, atomic file output and the CSV / key=value
// schemas emitted by the command-line tool.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oamqkd/decoy_keyrate.hpp"
#include "oamqkd/link_simulator.hpp"
#include "oamqkd/secure_distance.hpp"
#include "oamqkd/turbulence.hpp"

namespace oamqkd {

// Bad command line, missing or malformed configuration. Maps to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// key=value lines, '#' comments, section prefixes in the key ("source.mu").
class Config {
public:
    static Config parse(std::istream& in, const std::string& origin = "<config>");
    static Config from_file(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    bool contains(const std::string& key) const;

    std::optional<std::string> get(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Comma-separated list of numbers.
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
    double require_double(const std::string& key) const;

    // Throws ConfigError naming keys that were never read.
    void reject_unused() const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

// printf %.10g
std::string format_double(double v);

// Writes through a temporary file in the same directory and renames it into
// place, so a failed run never leaves a partial file behind.
void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

// Session CSV: block_index,class,sent,detected,sifted,errors,gain,qber
void write_session_csv(std::ostream& out, std::span<const BlockTally> blocks);
void write_observables(std::ostream& out, const DecoyObservables& obs);
// Keys mu, nu, q_mu, q_nu, e_mu, e_nu, y0 under an optional prefix ("obs.").
DecoyObservables observables_from_config(const Config& cfg, const std::string& prefix = "");

// KeyRateBreakdown CSV: q1_lower,e1_upper,q0,leak_ec,rate,secure
void write_keyrate_header(std::ostream& out);
void write_keyrate_row(std::ostream& out, const KeyRateBreakdown& k);

// Sweep CSV: q_mu,e_mu_star,e_nu_star,q1_lower,e1_upper,rate,secure
void write_sweep_csv(std::ostream& out, std::span<const RatePoint> curve);

// Centroid CSV: frame_index,x_mm,y_mm
void write_centroids_csv(std::ostream& out, std::span<const CentroidSample> samples);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;  // throws ConfigError when absent
};

CsvTable read_csv(std::istream& in);

// Reads every row of a DecoyObservables CSV; errors name the offending row.
std::vector<DecoyObservables> observables_from_csv(const CsvTable& table);

}  // namespace oamqkd
