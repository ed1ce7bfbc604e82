#include "output.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "delaystab/errors.hpp"
#include "version.hpp"

namespace delaystab::cli {

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
    : file_(path, std::ios::binary | std::ios::trunc), name_(path.filename().string()) {
    if (!file_) throw Error("cannot open " + path.string() + " for writing");
    bool first = true;
    for (std::string_view h : header) {
        if (!first) file_ << ',';
        file_ << h;
        first = false;
    }
    file_ << '\n';
}

void CsvWriter::row(std::initializer_list<Cell> cells) {
    line_.clear();
    bool first = true;
    for (const Cell& c : cells) {
        if (!first) line_ += ',';
        first = false;
        if (const auto* d = std::get_if<double>(&c)) {
            line_ += format_real(*d);
        } else if (const auto* i = std::get_if<long long>(&c)) {
            line_ += std::to_string(*i);
        } else if (const auto* s = std::get_if<std::string>(&c)) {
            if (s->find_first_of(",\"\n\r") != std::string::npos) {
                line_ += '"';
                for (char ch : *s) {
                    if (ch == '"') line_ += '"';
                    line_ += ch;
                }
                line_ += '"';
            } else {
                line_ += *s;
            }
        }
    }
    line_ += '\n';
    file_ << line_;
    ++rows_;
}

void CsvWriter::close() {
    file_.close();
    if (file_.fail()) throw Error("failed writing " + name_);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << doc.dump(2) << '\n';
    f.close();
    if (f.fail()) throw Error("failed writing " + path.string());
}

Manifest::Manifest(std::string command, nlohmann::json inputs, std::uint64_t seed)
    : command_(std::move(command)), inputs_(std::move(inputs)), seed_(seed) {}

std::string Manifest::input_hash() const {
    return "fnv1a64:" + hash_hex(fnv1a64(command_ + '\n' + inputs_.dump()));
}

void Manifest::write(const std::filesystem::path& dir) const {
    nlohmann::json files = nlohmann::json::array();
    for (const Entry& e : files_) files.push_back({{"name", e.name}, {"rows", e.rows}});
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const nlohmann::json doc = {
        {"command", command_},
        {"version", kToolVersion},
        {"input_hash", input_hash()},
        {"inputs", inputs_},
        {"seed", seed_},
        {"files", files},
        {"details", details_},
        {"wall_seconds", wall},
    };
    write_json(dir / "manifest.json", doc);
}

}  // namespace delaystab::cli
