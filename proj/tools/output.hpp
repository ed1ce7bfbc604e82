#pragma once

// Locale-independent CSV/JSON writers and the run manifest.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace delaystab::cli {

/// 17 significant digits, '.' as decimal point.
std::string format_real(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

/// One cell of a CSV row. std::monostate writes an empty field.
using Cell = std::variant<std::monostate, double, long long, std::string>;

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);

    void row(std::initializer_list<Cell> cells);
    void close();

    const std::string& name() const { return name_; }
    std::size_t rows() const { return rows_; }

private:
    std::ofstream file_;
    std::string name_;
    std::string line_;
    std::size_t rows_ = 0;
};

/// Pretty-printed, keys sorted, trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Collects output files and finally writes manifest.json.
class Manifest {
public:
    Manifest(std::string command, nlohmann::json inputs, std::uint64_t seed);

    void add_file(const std::string& name, std::size_t rows) { files_.push_back({name, rows}); }
    nlohmann::json& details() { return details_; }
    const nlohmann::json& inputs() const { return inputs_; }
    std::string input_hash() const;

    void write(const std::filesystem::path& dir) const;

private:
    struct Entry {
        std::string name;
        std::size_t rows;
    };

    std::string command_;
    nlohmann::json inputs_;
    std::uint64_t seed_;
    nlohmann::json details_ = nlohmann::json::object();
    std::vector<Entry> files_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace delaystab::cli
