#pragma once
// CSV artifacts. Reals are written with 17 significant digits so every
// double round-trips; integers are written as integers.

#include <cstdio>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uol/errors.hpp"
#include "uol/run_record.hpp"

namespace uol {

enum class CsvSchema { run_record, excess_curve, envelope, density, condition, summary, hedge_bench };

inline std::string_view schema_header(CsvSchema schema) {
    switch (schema) {
    case CsvSchema::run_record:
        return "t,block,x,expert_index,y_hat,y,step_loss,comparator_loss,cum_loss,cum_comparator_loss";
    case CsvSchema::excess_curve: return "t,excess";
    case CsvSchema::envelope: return "t,cum_loss,best_prefix_loss,comparator_class,envelope";
    case CsvSchema::density: return "experts,loss";
    case CsvSchema::condition: return "k,profile";
    case CsvSchema::summary: return "check,verdict,statistic,threshold,seeds";
    case CsvSchema::hedge_bench: return "trial,learner_loss,best_expert_loss,bound,violated";
    }
    return "";
}

inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Coordinates of a point; multi-dimensional points are ';'-joined so the
/// record keeps a single x column.
inline std::string format_point(std::span<const double> x) {
    std::string out;
    for (std::size_t c = 0; c < x.size(); ++c) {
        if (c) out += ';';
        out += format_real(x[c]);
    }
    return out;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::string_view header) : path_(path), out_(path) {
        if (!out_) throw io_error("cannot open " + path.string() + " for writing");
        out_ << header << '\n';
    }

    template <typename... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(fields), first = false), ...);
        out_ << '\n';
    }

    void close() {
        out_.close();
        if (!out_) throw io_error("failed writing " + path_.string());
    }

    ~CsvWriter() {
        if (out_.is_open()) out_.close();
    }

private:
    static std::string cell(double v) { return format_real(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    static std::string cell(Outcome v) { return format_real(v.value); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }

    std::filesystem::path path_;
    std::ofstream out_;
};

inline void emit_run_records(std::span<const RunRecord> records, const std::filesystem::path& path) {
    CsvWriter csv(path, schema_header(CsvSchema::run_record));
    for (const auto& r : records) {
        csv.row(r.t, r.block, format_point(r.x), r.expert_index, r.y_hat, r.y, r.step_loss, r.comparator_loss,
                r.cum_loss, r.cum_comparator_loss);
    }
    csv.close();
}

inline void emit_excess_curve(std::span<const double> curve, const std::filesystem::path& path) {
    CsvWriter csv(path, schema_header(CsvSchema::excess_curve));
    for (std::size_t t = 0; t < curve.size(); ++t) csv.row(t + 1, curve[t]);
    csv.close();
}

/// Schema-checked entry points.
inline void emit_csv(std::span<const RunRecord> records, CsvSchema schema, const std::filesystem::path& path) {
    if (schema != CsvSchema::run_record) throw contract_error("run records need the run_record schema");
    emit_run_records(records, path);
}

inline void emit_csv(std::span<const double> curve, CsvSchema schema, const std::filesystem::path& path) {
    if (schema != CsvSchema::excess_curve) throw contract_error("a curve needs the excess_curve schema");
    emit_excess_curve(curve, path);
}

/// Sequence export: t,x,y for d = 1, t,x1,...,xd,y otherwise.
inline void emit_sequence(std::span<const Sample> samples, const std::filesystem::path& path) {
    const std::size_t d = samples.empty() ? 1 : samples.front().x.size();
    std::string header = "t";
    if (d == 1) {
        header += ",x";
    } else {
        for (std::size_t c = 1; c <= d; ++c) header += ",x" + std::to_string(c);
    }
    header += ",y";
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << header << '\n';
    for (std::size_t t = 0; t < samples.size(); ++t) {
        out << t + 1;
        for (double v : samples[t].x) out << ',' << format_real(v);
        out << ',' << format_real(samples[t].y.value) << '\n';
    }
    if (!out) throw io_error("failed writing " + path.string());
}

}  // namespace uol
