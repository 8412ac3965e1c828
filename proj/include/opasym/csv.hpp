#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include "errors.hpp"

#ifndef OPASYM_VERSION
#define OPASYM_VERSION "0.1.0"
#endif

namespace opasym {

/// Shortest round-trip representation of a double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// CSV file with a provenance comment line and a header row.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& comment, const std::vector<std::string>& columns)
        : out_(path, std::ios::binary), columns_(columns.size()) {
        if (!out_) throw error("cannot write " + path);
        out_ << "# opasym " << OPASYM_VERSION;
        if (!comment.empty()) out_ << ' ' << comment;
        out_ << '\n';
        write_fields(columns);
    }

    template <class... Ts>
    void row(const Ts&... values) {
        static_assert(sizeof...(Ts) > 0);
        std::vector<std::string> f;
        (f.push_back(field(values)), ...);
        if (f.size() != columns_) throw error("CSV row has the wrong number of fields");
        write_fields(f);
    }

    /// Row of pre-formatted fields, for tables whose width is only known at run time.
    void row_fields(const std::vector<std::string>& f) {
        if (f.size() != columns_) throw error("CSV row has the wrong number of fields");
        write_fields(f);
    }

private:
    template <class T>
    static std::string field(const T& v) {
        if constexpr (std::is_floating_point_v<T>) {
            return format_double(static_cast<double>(v));
        } else if constexpr (std::is_integral_v<T>) {
            return std::to_string(v);
        } else {
            return std::string(v);
        }
    }

    void write_fields(const std::vector<std::string>& f) {
        for (std::size_t i = 0; i < f.size(); ++i) out_ << (i ? "," : "") << f[i];
        out_ << '\n';
    }

    std::ofstream out_;
    std::size_t columns_;
};

} // namespace opasym
