#include "spdtan/recording_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace spdtan {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'D', 'T'};
constexpr std::uint8_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "recording binary IO assumes a little-endian host");

template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const char* what) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw IoError(std::string("recording binary: truncated reading ") + what);
    return value;
}

}  // namespace

void save_recording_csv(const std::string& path, const Recording& rec) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "fs=" << rec.samples_per_second << "\n";
    for (std::size_t i = 0; i < rec.channels.size(); ++i) {
        out << (i ? "," : "") << rec.channels[i];
    }
    out << "\n";
    char buf[32];
    for (long s = 0; s < rec.n_samples(); ++s) {
        for (int ch = 0; ch < rec.n_channels(); ++ch) {
            std::snprintf(buf, sizeof(buf), "%.17g", rec.data(ch, s));
            out << (ch ? "," : "") << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

Recording load_recording_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("fs=", 0) != 0) {
        throw IoError("recording CSV: missing fs=<Hz> line in " + path);
    }
    Recording rec;
    rec.samples_per_second = std::strtod(line.c_str() + 3, nullptr);
    if (!std::getline(in, line)) throw IoError("recording CSV: missing channel header");
    std::stringstream header(line);
    std::string name;
    while (std::getline(header, name, ',')) rec.channels.push_back(name);
    const int n = static_cast<int>(rec.channels.size());
    if (n < 1) throw IoError("recording CSV: empty channel header");

    std::vector<double> values;
    long rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        int col = 0;
        while (std::getline(row, cell, ',')) {
            values.push_back(std::strtod(cell.c_str(), nullptr));
            ++col;
        }
        if (col != n) {
            throw IoError("recording CSV: row " + std::to_string(rows) + " has " +
                          std::to_string(col) + " columns, expected " + std::to_string(n));
        }
        ++rows;
    }
    rec.data.resize(n, rows);
    for (long s = 0; s < rows; ++s) {
        for (int ch = 0; ch < n; ++ch) rec.data(ch, s) = values[s * n + ch];
    }
    validate_recording(rec);
    return rec;
}

void save_recording_binary(const std::string& path, const Recording& rec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_raw(out, kVersion);
    write_raw(out, static_cast<std::uint32_t>(rec.n_channels()));
    write_raw(out, static_cast<std::uint64_t>(rec.n_samples()));
    write_raw(out, rec.samples_per_second);
    for (int ch = 0; ch < rec.n_channels(); ++ch) {
        out.write(reinterpret_cast<const char*>(rec.data.row(ch).eval().data()),
                  static_cast<std::streamsize>(sizeof(double) * rec.n_samples()));
    }
    if (!out) throw IoError("write failed: " + path);
}

Recording load_recording_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IoError("recording binary: bad magic in " + path);
    }
    const auto version = read_raw<std::uint8_t>(in, "version");
    if (version != kVersion) {
        throw IoError("recording binary: unsupported version " + std::to_string(version));
    }
    const auto n = read_raw<std::uint32_t>(in, "channel count");
    const auto t = read_raw<std::uint64_t>(in, "sample count");
    const auto fs = read_raw<double>(in, "sampling rate");
    if (n < 1 || t < 1) throw IoError("recording binary: empty dimensions in " + path);

    Recording rec;
    rec.samples_per_second = fs;
    rec.data.resize(static_cast<int>(n), static_cast<long>(t));
    std::vector<double> row(t);
    for (std::uint32_t ch = 0; ch < n; ++ch) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(sizeof(double) * t));
        if (!in) throw IoError("recording binary: truncated data in " + path);
        rec.data.row(ch) = Eigen::Map<const Vector>(row.data(), static_cast<long>(t));
    }
    rec.channels.reserve(n);
    for (std::uint32_t ch = 0; ch < n; ++ch) rec.channels.push_back("ch" + std::to_string(ch));
    validate_recording(rec);
    return rec;
}

}  // namespace spdtan
