#pragma once

#include <cstdio>
#include <optional>
#include <string>

#include "reslab/tls.hpp"

namespace reslab {

// One rendered row of the aging comparison. q_c is not part of a TLS fit; it
// is carried through when the caller knows it (e.g. from a notch fit).
struct ReportRow {
    std::string label;
    TLSFitResult fit;
    std::optional<double> q_c;
};

namespace detail {

inline std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

inline std::string q_c_cell(const std::optional<double>& q_c) {
    return q_c ? fmt("%.2f", *q_c / 1e6) : std::string("-");
}

}  // namespace detail

// Markdown table in the conventional column order for resonator loss
// surveys: f_r, Q_c, Q_i at low power, TLS loss, other loss, beta.
inline std::string render_markdown(const ReportRow& before, const ReportRow& after,
                                   const AgingDelta& delta) {
    using detail::fmt;
    std::string out;
    out += "| resonator | f_r (GHz) | Q_c (1e6) | Q_i,LP (1e6) | F.tan_d0 (1e-6) | "
           "tan_d_other (1e-6) | beta |\n";
    out += "|---|---|---|---|---|---|---|\n";
    for (const ReportRow* row : {&before, &after}) {
        out += "| " + row->label + " | " + fmt("%.4f", row->fit.f_r / 1e9) + " | " +
               detail::q_c_cell(row->q_c) + " | " + fmt("%.3f", row->fit.q_i_lp / 1e6) + " | " +
               fmt("%.3f", row->fit.params.f_tls0 * 1e6) + " | " +
               fmt("%.3f", row->fit.params.tan_other * 1e6) + " | " +
               fmt("%.3f", row->fit.params.beta) + " |\n";
    }
    out += "| change | | | " + fmt("%+.3f", delta.q_i_lp_delta / 1e6) + " | " +
           fmt("%+.1f%%", delta.f_tls0_pct) + " | " + fmt("%+.3f", delta.tan_other_delta * 1e6) +
           " | |\n";
    return out;
}

inline std::string render_csv(const ReportRow& before, const ReportRow& after,
                              const AgingDelta& delta) {
    using detail::fmt;
    std::string out = "row,f_r_ghz,q_c_1e6,q_i_lp_1e6,f_tls0_1e-6,tan_other_1e-6,beta\n";
    for (const ReportRow* row : {&before, &after}) {
        out += row->label + "," + fmt("%.9g", row->fit.f_r / 1e9) + "," +
               (row->q_c ? fmt("%.9g", *row->q_c / 1e6) : std::string()) + "," +
               fmt("%.9g", row->fit.q_i_lp / 1e6) + "," +
               fmt("%.9g", row->fit.params.f_tls0 * 1e6) + "," +
               fmt("%.9g", row->fit.params.tan_other * 1e6) + "," +
               fmt("%.9g", row->fit.params.beta) + "\n";
    }
    out += "change,,," + fmt("%.9g", delta.q_i_lp_delta / 1e6) + "," +
           fmt("%.9g", delta.f_tls0_pct) + "%," + fmt("%.9g", delta.tan_other_delta * 1e6) +
           ",\n";
    return out;
}

}  // namespace reslab
