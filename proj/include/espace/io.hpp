#pragma once

// CSV emission (17 significant digits, header row), atomic file replacement
// and the transaction-event reader.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "espace/aggregation.hpp"
#include "espace/error.hpp"

namespace espace {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Accumulates a CSV document in memory.
class CsvWriter {
public:
    explicit CsvWriter(std::initializer_list<std::string_view> header) {
        bool first = true;
        for (auto h : header) {
            if (!first) out_ += ',';
            out_ += h;
            first = false;
        }
        out_ += '\n';
        columns_ = header.size();
    }

    CsvWriter& field(double v) { return raw(format_double(v)); }
    CsvWriter& field(std::size_t v) { return raw(std::to_string(v)); }
    CsvWriter& field(std::string_view v) { return raw(v); }

    void end_row() {
        if (in_row_ != columns_)
            throw Error(Errc::io_error, "CSV row has " + std::to_string(in_row_) + " fields, header has " +
                                            std::to_string(columns_));
        out_ += '\n';
        in_row_ = 0;
        ++rows_;
    }

    std::size_t rows() const noexcept { return rows_; }
    const std::string& str() const noexcept { return out_; }

private:
    CsvWriter& raw(std::string_view v) {
        if (in_row_ > 0) out_ += ',';
        out_ += v;
        ++in_row_;
        return *this;
    }

    std::string out_;
    std::size_t columns_ = 0;
    std::size_t in_row_ = 0;
    std::size_t rows_ = 0;
};

/// Writes `content` to a sibling temp file and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw Error(Errc::io_error, "cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(Errc::io_error, "cannot open " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw Error(Errc::io_error, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(Errc::io_error, "cannot rename onto " + path.string());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::io_error, "cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// Parses `x,y,amount,v_creditor,v_borrower` rows (header required).
inline std::vector<TransactionEvent> parse_events_csv(std::string_view text) {
    std::vector<TransactionEvent> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string line(text.substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "x,y,amount,v_creditor,v_borrower")
                throw Error(Errc::parse_error, "events line 1: expected header x,y,amount,v_creditor,v_borrower");
            header_seen = true;
            continue;
        }
        double v[5];
        std::size_t start = 0;
        for (int c = 0; c < 5; ++c) {
            const std::size_t comma = c < 4 ? line.find(',', start) : line.size();
            if (comma == std::string::npos)
                throw Error(Errc::parse_error, "events line " + std::to_string(line_no) + ": expected 5 fields");
            const std::string cell = line.substr(start, comma - start);
            std::size_t used = 0;
            try {
                v[c] = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cell.size())
                throw Error(Errc::parse_error,
                            "events line " + std::to_string(line_no) + ": bad number '" + cell + "'");
            start = comma + 1;
        }
        out.push_back({v[0], v[1], v[2], v[3], v[4]});
    }
    if (!header_seen) throw Error(Errc::parse_error, "events file is empty");
    return out;
}

inline std::string events_csv(const std::vector<TransactionEvent>& events) {
    CsvWriter w({"x", "y", "amount", "v_creditor", "v_borrower"});
    for (const auto& e : events) {
        w.field(e.x).field(e.y).field(e.amount).field(e.v_creditor).field(e.v_borrower);
        w.end_row();
    }
    return w.str();
}

inline std::string grid_csv(const FieldGrid& g) {
    CsvWriter w({"xi", "yi", "value", "vel_x", "vel_y"});
    for (std::size_t j = 0; j < g.n_y(); ++j) {
        for (std::size_t i = 0; i < g.n_x(); ++i) {
            w.field(i).field(j).field(g.value(i, j)).field(g.vel_x(i, j)).field(g.vel_y(i, j));
            w.end_row();
        }
    }
    return w.str();
}

}  // namespace espace
