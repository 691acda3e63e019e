#include "snails/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "snails/errors.hpp"

namespace snails {

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.good()) throw ParseError("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string event_log_to_csv(const EventLog& log, int d) {
    std::ostringstream out;
    out << "time,kind,particle_id";
    for (int k = 0; k < d; ++k) out << ",x" << k;
    out << "\n";
    for (const Event& e : log) {
        out << format_real(e.time) << ',' << to_string(e.kind) << ',' << e.particle_id;
        for (int k = 0; k < d; ++k) {
            out << ',' << format_real(k < static_cast<int>(e.position.size()) ? e.position[k] : 0.0);
        }
        out << "\n";
    }
    return out.str();
}

EventLog event_log_from_csv(const std::string& csv, int* d_out) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("event log: empty file");
    int d = 0;
    {
        std::istringstream header(line);
        std::string col;
        int n_cols = 0;
        while (std::getline(header, col, ',')) ++n_cols;
        d = n_cols - 3;
        if (d < 1) throw ParseError("event log: bad header");
    }
    if (d_out) *d_out = d;
    EventLog log;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        Event e;
        if (!std::getline(row, field, ',')) throw ParseError("event log: short row");
        e.time = std::stod(field);
        if (!std::getline(row, field, ',')) throw ParseError("event log: short row");
        if (field == "INFECT") e.kind = EventKind::Infect;
        else if (field == "REMOVE") e.kind = EventKind::Remove;
        else if (field == "TRUNCATE") e.kind = EventKind::Truncate;
        else throw ParseError("event log: unknown kind " + field);
        if (!std::getline(row, field, ',')) throw ParseError("event log: short row");
        e.particle_id = std::stoll(field);
        e.position.reserve(d);
        for (int k = 0; k < d; ++k) {
            if (!std::getline(row, field, ',')) throw ParseError("event log: short row");
            e.position.push_back(std::stod(field));
        }
        log.push_back(std::move(e));
    }
    return log;
}

std::string run_results_csv(const std::vector<RunResult>& runs,
                            const std::vector<double>& occupation_thresholds) {
    std::ostringstream out;
    out << "run_id,seed,extinction_time,censored,total_infections,integral_I,n_entry,"
           "max_inf_radius,truncated,window_overflow";
    for (double thr : occupation_thresholds) out << ",occupation_le_" << format_real(thr);
    out << "\n";
    for (const RunResult& r : runs) {
        out << r.run_id << ',' << r.seed << ',' << format_real(r.extinction_time) << ','
            << (r.censored ? 1 : 0) << ',' << r.total_infections << ','
            << format_real(r.integral_I) << ',' << r.n_entry << ','
            << format_real(r.max_inf_radius) << ',' << (r.truncated ? 1 : 0) << ','
            << (r.window_overflow ? 1 : 0);
        for (const auto& [thr, measure] : r.occupation_below) {
            (void)thr;
            out << ',' << format_real(measure);
        }
        out << "\n";
    }
    return out.str();
}

std::string survival_curve_csv(const SurvivalCurve& curve) {
    std::ostringstream out;
    out << "horizon,n_runs,survivors,p,ci_low,ci_high,used_in_fit\n";
    for (const SurvivalPoint& pt : curve.points) {
        out << format_real(pt.horizon) << ',' << pt.n_runs << ',' << pt.survivors << ','
            << format_real(pt.p) << ',' << format_real(pt.ci_low) << ','
            << format_real(pt.ci_high) << ',' << (pt.used_in_fit ? 1 : 0) << "\n";
    }
    return out.str();
}

std::string shape_quantiles_csv(const ShapeReport& report) {
    std::ostringstream out;
    out << "t";
    for (double q : kShapeQuantiles) out << ",front_radius_q" << format_real(q);
    for (double q : kShapeQuantiles) out << ",sup_front_q" << format_real(q);
    out << "\n";
    for (const ShapeRow& row : report.rows) {
        out << format_real(row.t);
        for (double v : row.front_radius_q) out << ',' << format_real(v);
        for (double v : row.sup_front_q) out << ',' << format_real(v);
        out << "\n";
    }
    return out.str();
}

std::string coupling_csv(const CouplingReport& report) {
    std::ostringstream out;
    out << "pair,seed,steps_checked,violations,first_violation_step\n";
    for (const CouplingPairRow& row : report.per_pair) {
        out << row.pair << ',' << row.seed << ',' << row.steps_checked << ',' << row.violations
            << ',' << row.first_violation_step << "\n";
    }
    return out.str();
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows, const std::string& statistic) {
    std::ostringstream out;
    out << "dt,mode,statistic,estimate,se,n_runs\n";
    for (const ConvergenceRow& row : rows) {
        out << format_real(row.dt) << ',' << to_string(row.mode) << ',' << statistic << ','
            << format_real(row.estimate) << ',' << format_real(row.se) << ',' << row.n_runs
            << "\n";
    }
    return out.str();
}

std::string percolation_csv(const std::vector<PercolationRow>& rows) {
    std::ostringstream out;
    out << "lambda,box_size,mean_cluster_size,ci_low,ci_high,boundary_touch_freq\n";
    for (const PercolationRow& row : rows) {
        out << format_real(row.lambda) << ',' << format_real(row.box_size) << ','
            << format_real(row.mean_cluster_size) << ',' << format_real(row.ci_low) << ','
            << format_real(row.ci_high) << ',' << format_real(row.boundary_touch_freq) << "\n";
    }
    return out.str();
}

std::string stationarity_csv(const std::vector<StationarityRow>& rows) {
    std::ostringstream out;
    out << "index,x_lo,x_hi,expected,mean0,var0,mean_t,var_t,z_mean0,z_var0,z_mean_t,z_var_t,"
           "flagged\n";
    for (const StationarityRow& r : rows) {
        out << r.index << ',' << format_real(r.x_lo) << ',' << format_real(r.x_hi) << ','
            << format_real(r.expected) << ',' << format_real(r.mean0) << ','
            << format_real(r.var0) << ',' << format_real(r.mean_t) << ',' << format_real(r.var_t)
            << ',' << format_real(r.z_mean0) << ',' << format_real(r.z_var0) << ','
            << format_real(r.z_mean_t) << ',' << format_real(r.z_var_t) << ','
            << (r.flagged ? 1 : 0) << "\n";
    }
    return out.str();
}

namespace {

// Fixed-precision coordinates keep the SVG byte-stable.
std::string svg_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

struct Frame {
    double x_lo, x_hi, y_lo, y_hi;
    double width = 640.0, height = 420.0, pad = 50.0;
    double px(double x) const {
        return pad + (x - x_lo) / (x_hi - x_lo) * (width - 2 * pad);
    }
    double py(double y) const {
        return height - pad - (y - y_lo) / (y_hi - y_lo) * (height - 2 * pad);
    }
};

void svg_header(std::ostringstream& out, const Frame& f, const std::string& x_label,
                const std::string& y_label) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\""
        << f.height << "\" viewBox=\"0 0 " << f.width << " " << f.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << svg_coord(f.pad) << "\" y1=\"" << svg_coord(f.height - f.pad)
        << "\" x2=\"" << svg_coord(f.width - f.pad) << "\" y2=\"" << svg_coord(f.height - f.pad)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << svg_coord(f.pad) << "\" y1=\"" << svg_coord(f.pad) << "\" x2=\""
        << svg_coord(f.pad) << "\" y2=\"" << svg_coord(f.height - f.pad)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << svg_coord(f.width / 2) << "\" y=\"" << svg_coord(f.height - 12)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << svg_coord(f.height / 2)
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << svg_coord(f.height / 2) << ")\">" << y_label << "</text>\n";
}

}  // namespace

std::string survival_svg(const SurvivalCurve& curve, const FitResult& fit) {
    std::ostringstream out;
    double x_hi = 1.0, y_lo = 0.0;
    for (const SurvivalPoint& pt : curve.points) {
        x_hi = std::max(x_hi, pt.horizon);
        if (pt.survivors > 0) y_lo = std::min(y_lo, std::log10(pt.p));
    }
    Frame f{0.0, x_hi * 1.05, y_lo - 0.5, 0.2};
    svg_header(out, f, "horizon T", "log10 P(extinction time >= T)");
    for (const SurvivalPoint& pt : curve.points) {
        if (pt.survivors == 0) continue;
        const double x = f.px(pt.horizon);
        const double y = f.py(std::log10(pt.p));
        out << "<circle cx=\"" << svg_coord(x) << "\" cy=\"" << svg_coord(y)
            << "\" r=\"3\" fill=\"steelblue\"/>\n";
        if (pt.ci_low > 0.0) {
            out << "<line x1=\"" << svg_coord(x) << "\" y1=\"" << svg_coord(f.py(std::log10(pt.ci_low)))
                << "\" x2=\"" << svg_coord(x) << "\" y2=\""
                << svg_coord(f.py(std::log10(pt.ci_high))) << "\" stroke=\"steelblue\"/>\n";
        }
    }
    if (fit.available) {
        const double log10e = 0.43429448190325176;
        const double y1 = (fit.intercept - fit.c_hat * fit.horizon_lo) * log10e;
        const double y2 = (fit.intercept - fit.c_hat * fit.horizon_hi) * log10e;
        out << "<line x1=\"" << svg_coord(f.px(fit.horizon_lo)) << "\" y1=\"" << svg_coord(f.py(y1))
            << "\" x2=\"" << svg_coord(f.px(fit.horizon_hi)) << "\" y2=\"" << svg_coord(f.py(y2))
            << "\" stroke=\"crimson\" stroke-dasharray=\"4 3\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string fan_chart_svg(const ShapeReport& report) {
    std::ostringstream out;
    double x_hi = 1.0, y_hi = 1.0;
    for (const ShapeRow& row : report.rows) {
        x_hi = std::max(x_hi, row.t);
        y_hi = std::max(y_hi, row.sup_front_q.back());
    }
    Frame f{0.0, x_hi * 1.05, 0.0, y_hi * 1.1};
    svg_header(out, f, "t", "sup front");
    const char* colors[6] = {"#c6dbef", "#9ecae1", "#4292c6", "#2171b5", "#9ecae1", "#c6dbef"};
    for (std::size_t q = 0; q < kShapeQuantiles.size(); ++q) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[q] << "\" points=\"";
        for (const ShapeRow& row : report.rows) {
            out << svg_coord(f.px(row.t)) << ',' << svg_coord(f.py(row.sup_front_q[q])) << ' ';
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace snails
