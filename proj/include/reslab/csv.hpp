#pragma once

#include <cctype>
#include <cerrno>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "reslab/error.hpp"
#include "reslab/types.hpp"

namespace reslab {

enum class TraceFormat { re_im, db_phase };

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_number(const std::string& field, std::size_t line_no) {
    if (field.empty()) throw ParseError("empty numeric field", line_no);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || errno == ERANGE || !std::isfinite(v))
        throw ParseError("cannot parse number '" + field + "'", line_no);
    return v;
}

struct CsvBody {
    std::string header;
    std::vector<std::pair<std::size_t, std::string>> rows;  // (line number, content)
    std::string comments;                                   // '#' lines, joined
};

inline CsvBody read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    CsvBody body;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            std::string c = trim(t.substr(1));
            if (!c.empty()) {
                if (!body.comments.empty()) body.comments += '\n';
                body.comments += c;
            }
            continue;
        }
        if (body.header.empty())
            body.header = t;
        else
            body.rows.emplace_back(line_no, t);
    }
    if (body.header.empty()) throw ParseError("missing CSV header in " + path);
    return body;
}

}  // namespace detail

inline constexpr const char* trace_header(TraceFormat format) {
    return format == TraceFormat::re_im ? "freq_hz,re,im" : "freq_hz,amp_db,phase_rad";
}

// Reads a trace CSV. re_im rows are taken verbatim; db_phase rows are
// converted via sample = 10^(amp_db/20) * exp(i*phase_rad).
inline ComplexTrace load_trace(const std::string& path, TraceFormat format) {
    const auto body = detail::read_csv(path);
    if (body.header != trace_header(format))
        throw ParseError("expected header '" + std::string(trace_header(format)) + "', got '" +
                         body.header + "'");
    ComplexTrace trace;
    trace.meta = body.comments;
    trace.freqs.reserve(body.rows.size());
    trace.samples.reserve(body.rows.size());
    for (const auto& [line_no, row] : body.rows) {
        const auto fields = detail::split_csv(row);
        if (fields.size() != 3) throw ParseError("expected 3 fields", line_no);
        const double f = detail::parse_number(fields[0], line_no);
        const double u = detail::parse_number(fields[1], line_no);
        const double v = detail::parse_number(fields[2], line_no);
        trace.freqs.push_back(f);
        if (format == TraceFormat::re_im) {
            trace.samples.emplace_back(u, v);
        } else {
            const double amp = std::pow(10.0, u / 20.0);
            trace.samples.push_back(amp * std::exp(Complex(0.0, v)));
        }
    }
    trace.validate();
    return trace;
}

// Peeks at the header to pick the format. Used by the CLI; library callers
// normally know what they wrote.
inline TraceFormat detect_trace_format(const std::string& path) {
    const auto body = detail::read_csv(path);
    if (body.header == trace_header(TraceFormat::re_im)) return TraceFormat::re_im;
    if (body.header == trace_header(TraceFormat::db_phase)) return TraceFormat::db_phase;
    throw ParseError("unrecognized trace header '" + body.header + "'");
}

// Writes a trace at full double precision. re_im output round-trips through
// load_trace bit-exactly.
inline void save_trace(const ComplexTrace& trace, std::ostream& out,
                       TraceFormat format = TraceFormat::re_im) {
    trace.validate();
    std::istringstream meta(trace.meta);
    std::string meta_line;
    while (std::getline(meta, meta_line)) out << "# " << meta_line << '\n';
    out << trace_header(format) << '\n';
    char buf[128];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (format == TraceFormat::re_im) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", trace.freqs[i],
                          trace.samples[i].real(), trace.samples[i].imag());
        } else {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", trace.freqs[i],
                          20.0 * std::log10(std::abs(trace.samples[i])),
                          std::arg(trace.samples[i]));
        }
        out << buf << '\n';
    }
}

inline void save_trace(const ComplexTrace& trace, const std::string& path,
                       TraceFormat format = TraceFormat::re_im) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open file for writing: " + path);
    save_trace(trace, out, format);
    if (!out) throw ValidationError("write failed: " + path);
}

// Reads a power sweep CSV (header n_mean,qi or n_mean,qi,qi_sigma) and
// attaches the fixed measurement context.
inline PowerSweep load_power_sweep(const std::string& path, double f_r, double temperature) {
    const auto body = detail::read_csv(path);
    bool with_sigma = false;
    if (body.header == "n_mean,qi,qi_sigma")
        with_sigma = true;
    else if (body.header != "n_mean,qi")
        throw ParseError("expected header 'n_mean,qi[,qi_sigma]', got '" + body.header + "'");

    PowerSweep sweep;
    sweep.f_r = f_r;
    sweep.temperature = temperature;
    for (const auto& [line_no, row] : body.rows) {
        const auto fields = detail::split_csv(row);
        const std::size_t want = with_sigma ? 3 : 2;
        if (fields.size() != want)
            throw ParseError("expected " + std::to_string(want) + " fields", line_no);
        SweepPoint p;
        p.n_mean = detail::parse_number(fields[0], line_no);
        p.q_i = detail::parse_number(fields[1], line_no);
        if (with_sigma) p.q_i_sigma = detail::parse_number(fields[2], line_no);
        sweep.points.push_back(p);
    }
    sweep.validate();
    return sweep;
}

inline void save_power_sweep(const PowerSweep& sweep, std::ostream& out,
                             const std::string& comments = {}) {
    sweep.validate();
    std::istringstream meta(comments);
    std::string meta_line;
    while (std::getline(meta, meta_line)) out << "# " << meta_line << '\n';
    const bool with_sigma = !sweep.points.empty() && sweep.points.front().q_i_sigma.has_value();
    out << (with_sigma ? "n_mean,qi,qi_sigma" : "n_mean,qi") << '\n';
    char buf[128];
    for (const auto& p : sweep.points) {
        if (with_sigma) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", p.n_mean, p.q_i,
                          p.q_i_sigma.value_or(0.0));
        } else {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", p.n_mean, p.q_i);
        }
        out << buf << '\n';
    }
}

inline void save_power_sweep(const PowerSweep& sweep, const std::string& path,
                             const std::string& comments = {}) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open file for writing: " + path);
    save_power_sweep(sweep, out, comments);
    if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace reslab
