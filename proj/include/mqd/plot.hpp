#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mqd/analysis.hpp"
#include "mqd/integrator.hpp"
#include "mqd/report.hpp"

// Standalone SVG figures. Plotting is cosmetic: callers wrap these in
// try/catch so a plotting failure never fails a run.

namespace mqd {
namespace svg {

struct Panel {
    double x0, y0, w, h;      // screen rectangle (y grows downward)
    double lo_x, hi_x;        // world range, horizontal
    double lo_y, hi_y;        // world range, vertical

    double sx(double x) const { return x0 + (x - lo_x) / (hi_x - lo_x) * w; }
    double sy(double y) const { return y0 + h - (y - lo_y) / (hi_y - lo_y) * h; }
};

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

class Canvas {
  public:
    Canvas(double width, double height) : width_(width), height_(height) {}

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double sw = 1.0) {
        body_ << "<line x1='" << num(x1) << "' y1='" << num(y1) << "' x2='" << num(x2)
              << "' y2='" << num(y2) << "' stroke='" << stroke << "' stroke-width='" << sw
              << "'/>\n";
    }

    void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::string& stroke, double sw = 1.0, double opacity = 1.0) {
        body_ << "<polyline fill='none' stroke='" << stroke << "' stroke-width='" << sw
              << "' stroke-opacity='" << opacity << "' points='";
        for (std::size_t i = 0; i < xs.size(); ++i)
            body_ << num(xs[i]) << ',' << num(ys[i]) << ' ';
        body_ << "'/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill) {
        body_ << "<rect x='" << num(x) << "' y='" << num(y) << "' width='" << num(w)
              << "' height='" << num(h) << "' fill='" << fill << "'/>\n";
    }

    void text(double x, double y, const std::string& s, double size = 12.0,
              const std::string& anchor = "start") {
        body_ << "<text x='" << num(x) << "' y='" << num(y) << "' font-size='" << size
              << "' font-family='sans-serif' text-anchor='" << anchor << "'>" << s
              << "</text>\n";
    }

    // Axis frame with min/max labels on both axes.
    void frame(const Panel& p, const std::string& xlabel, const std::string& ylabel,
               const std::string& title) {
        body_ << "<rect x='" << num(p.x0) << "' y='" << num(p.y0) << "' width='" << num(p.w)
              << "' height='" << num(p.h) << "' fill='none' stroke='#444'/>\n";
        text(p.x0 + p.w / 2, p.y0 - 8, title, 13, "middle");
        text(p.x0 + p.w / 2, p.y0 + p.h + 30, xlabel, 12, "middle");
        text(p.x0, p.y0 + p.h + 14, num_label(p.lo_x), 10, "middle");
        text(p.x0 + p.w, p.y0 + p.h + 14, num_label(p.hi_x), 10, "middle");
        text(p.x0 - 4, p.y0 + p.h, num_label(p.lo_y), 10, "end");
        text(p.x0 - 4, p.y0 + 10, num_label(p.hi_y), 10, "end");
        body_ << "<text x='" << num(p.x0 - 34) << "' y='" << num(p.y0 + p.h / 2)
              << "' font-size='12' font-family='sans-serif' text-anchor='middle' transform='rotate(-90 "
              << num(p.x0 - 34) << ' ' << num(p.y0 + p.h / 2) << ")'>" << ylabel
              << "</text>\n";
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + path.string());
        out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width_ << "' height='"
            << height_ << "' viewBox='0 0 " << width_ << ' ' << height_ << "'>\n"
            << "<rect width='100%' height='100%' fill='white'/>\n"
            << body_.str() << "</svg>\n";
        if (!out) throw std::runtime_error("write failed for " + path.string());
    }

  private:
    static std::string num_label(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", v);
        return buf;
    }

    double width_, height_;
    std::ostringstream body_;
};

}  // namespace svg

// Worldline panel: particle positions against time, one polyline per particle
// (lines and frames both subsampled so huge runs stay viewable and the file
// stays small).
inline void plot_worldlines(svg::Canvas& c, const svg::Panel& p, const Trajectory& t,
                            std::size_t max_lines = 80, std::size_t max_points = 400) {
    const std::size_t n = t.positions.empty() ? 0 : t.positions[0].size();
    if (n == 0 || t.frames() < 2) return;
    const std::size_t stride = std::max<std::size_t>(1, n / max_lines);
    const std::size_t fstride = std::max<std::size_t>(1, t.frames() / max_points);
    for (std::size_t j = 0; j < n; j += stride) {
        std::vector<double> xs, ys;
        xs.reserve(t.frames() / fstride + 2);
        ys.reserve(t.frames() / fstride + 2);
        for (std::size_t i = 0; i < t.frames(); i += fstride) {
            xs.push_back(p.sx(t.times[i]));
            ys.push_back(p.sy(t.positions[i][j]));
        }
        if ((t.frames() - 1) % fstride != 0) {  // always end on the final frame
            xs.push_back(p.sx(t.times.back()));
            ys.push_back(p.sy(t.positions.back()[j]));
        }
        c.polyline(xs, ys, "#1f6fb2", 0.7, 0.8);
    }
}

// Box figure (fig1.svg): worldline panel for one box state with the detected
// period marked.
inline void plot_box_figure(const std::filesystem::path& path, const Trajectory& t,
                            const BoxStateReport& b, double box_length) {
    svg::Canvas c(640, 420);
    svg::Panel p{60, 40, 540, 320, t.times.front(), t.times.back(), 0.0, box_length};
    plot_worldlines(c, p, t);
    if (b.detection_error.empty()) {
        const double tp = t.times.front() + b.estimate.period;
        if (tp <= p.hi_x) {
            c.line(p.sx(tp), p.y0, p.sx(tp), p.y0 + p.h, "#c23b22", 1.2);
            c.text(p.sx(tp) + 4, p.y0 + 16, "T = " + svg::num(b.estimate.period) + " ps", 11);
        }
    }
    c.frame(p, "t  (ps)", "x  (nm)", "box state n = " + std::to_string(b.state));
    c.save(path);
}

// Energy-level figure (fig2.svg): measured period-derived energies against the
// eigenstate references, one bar pair per state.
inline void plot_energy_bars(const std::filesystem::path& path,
                             const std::vector<BoxStateReport>& states) {
    std::vector<const BoxStateReport*> ok;
    for (const BoxStateReport& b : states)
        if (b.detection_error.empty()) ok.push_back(&b);
    if (ok.empty()) throw std::runtime_error("no detected periods to plot");

    double emax = 0.0;
    for (const BoxStateReport* b : ok) emax = std::max({emax, b->e_micro, b->e_box});

    svg::Canvas c(640, 420);
    svg::Panel p{70, 40, 520, 320, 0.0, static_cast<double>(ok.size()), 0.0, 1.1 * emax};
    for (std::size_t i = 0; i < ok.size(); ++i) {
        const double xm = p.sx(i + 0.18), xb = p.sx(i + 0.54);
        const double wm = p.sx(i + 0.46) - xm, wb = p.sx(i + 0.82) - xb;
        c.rect(xm, p.sy(ok[i]->e_micro), wm, p.sy(0) - p.sy(ok[i]->e_micro), "#1f6fb2");
        c.rect(xb, p.sy(ok[i]->e_box), wb, p.sy(0) - p.sy(ok[i]->e_box), "#c23b22");
        c.text(p.sx(i + 0.5), p.y0 + p.h + 14, "n = " + std::to_string(ok[i]->state), 11,
               "middle");
    }
    c.text(p.x0 + 10, p.y0 + 16, "measured (blue)  vs  eigenstate reference (red)", 11);
    c.frame(p, "state", "E  (m_e nm^2 / ps^2)", "period-derived energies");
    c.save(path);
}

// Slit triptych (fig3.svg): density at t = 0, worldlines, and the final density
// against the reference, side by side.
inline void plot_slit_triptych(const std::filesystem::path& path, const Trajectory& t,
                               const std::function<double(double)>& density0,
                               const std::function<double(double)>& density_final,
                               double kde_bandwidth, double half_range) {
    if (t.frames() < 2) throw std::runtime_error("trajectory too short to plot");
    svg::Canvas c(1080, 420);

    auto density_panel = [&](const svg::Panel& p, const std::vector<double>& positions,
                             const std::function<double(double)>& ref) {
        std::vector<double> grid, kde;
        const int gn = 400;
        for (int i = 0; i <= gn; ++i)
            grid.push_back(p.lo_x + (p.hi_x - p.lo_x) * i / double(gn));
        kde = kde_density(positions, grid, kde_bandwidth);
        double ymax = 0.0;
        for (int i = 0; i <= gn; ++i) ymax = std::max({ymax, kde[i], ref(grid[i])});
        svg::Panel q = p;
        q.lo_y = 0.0;
        q.hi_y = 1.15 * ymax;
        std::vector<double> xs, ys, rs;
        for (int i = 0; i <= gn; ++i) {
            xs.push_back(q.sx(grid[i]));
            ys.push_back(q.sy(kde[i]));
            rs.push_back(q.sy(ref(grid[i])));
        }
        c.polyline(xs, ys, "#1f6fb2", 1.5);
        c.polyline(xs, rs, "#c23b22", 1.2);
        return q;
    };

    svg::Panel left{60, 40, 280, 320, -half_range, half_range, 0, 1};
    svg::Panel mid{420, 40, 280, 320, t.times.front(), t.times.back(), -half_range,
                   half_range};
    svg::Panel right{780, 40, 280, 320, -half_range, half_range, 0, 1};

    svg::Panel lq = density_panel(left, t.positions.front(), density0);
    plot_worldlines(c, mid, t, 120);
    svg::Panel rq = density_panel(right, t.positions.back(), density_final);

    c.frame(lq, "x  (nm)", "density  (1/nm)", "t = 0 (blue: ensemble, red: reference)");
    c.frame(mid, "t  (ps)", "x  (nm)", "trajectories");
    c.frame(rq, "x  (nm)", "density  (1/nm)",
            "t = " + svg::num(t.times.back()) + " ps");
    c.save(path);
}

}  // namespace mqd
