#include "denjoy/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace denjoy {

std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
        out << contents;
        if (!out) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string schedule_csv(const RectangleSchedule& sch) {
    std::ostringstream out;
    out << "m,k,x_km,A_m\n";
    for (int m = 1; m <= sch.M0; ++m)
        for (int k = 1; k <= sch.d(); ++k)
            out << m << "," << k << ","
                << sch.x[static_cast<std::size_t>(m)][static_cast<std::size_t>(k - 1)] << ","
                << fmt_real(sch.A[static_cast<std::size_t>(m)]) << "\n";
    return out.str();
}

std::string distortion_csv(const DistortionReport& report) {
    std::ostringstream out;
    out << "stage,len_I,len_Iprime,ratio,bound\n";
    for (const DistortionStage& stage : report.per_stage)
        out << stage.stage << "," << fmt_real(stage.image_length) << ","
            << fmt_real(stage.flank_length) << "," << fmt_real(stage.ratio) << ","
            << fmt_real(report.bound) << "\n";
    return out.str();
}

std::string grid_csv(const WeightGrid& grid) {
    std::ostringstream out;
    grid.to_csv(out);
    return out.str();
}

std::string svg_system_plot(const DenjoySystem& sys) {
    const double width = 800.0, height = 400.0;
    const double lambda = sys.circumference();
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 400\">\n";
    out << "<rect width=\"800\" height=\"400\" fill=\"#ffffff\"/>\n";
    out << "<line x1=\"0\" y1=\"195\" x2=\"800\" y2=\"195\" stroke=\"#cccccc\"/>\n";

    double max_len = 0.0;
    for (const auto& gap : sys.gaps()) max_len = std::max(max_len, gap.length);
    for (const auto& gap : sys.gaps()) {
        double x = gap.left / lambda * width;
        double w = std::max(gap.length / lambda * width, 0.4);
        double h = 170.0 * gap.length / max_len;
        out << "<rect x=\"" << fmt_real(x) << "\" y=\"" << fmt_real(190.0 - h) << "\" width=\""
            << fmt_real(w) << "\" height=\"" << fmt_real(h) << "\" fill=\"#4477aa\"/>\n";
    }

    const int n = 400;
    std::vector<double> ders(n);
    double d_lo = 1.0, d_hi = 1.0;
    for (int i = 0; i < n; ++i) {
        double y = lambda * (i + 0.5) / n;
        ders[static_cast<std::size_t>(i)] = generator_derivative(sys, locate(sys, y), 1, 1);
        d_lo = std::min(d_lo, ders[static_cast<std::size_t>(i)]);
        d_hi = std::max(d_hi, ders[static_cast<std::size_t>(i)]);
    }
    double span = std::max(d_hi - d_lo, 1e-12);
    out << "<polyline fill=\"none\" stroke=\"#aa3333\" points=\"";
    for (int i = 0; i < n; ++i) {
        double px = (i + 0.5) / n * width;
        double py = 390.0 - 180.0 * (ders[static_cast<std::size_t>(i)] - d_lo) / span;
        out << fmt_real(px) << "," << fmt_real(py) << (i + 1 < n ? " " : "");
    }
    out << "\"/>\n";
    out << "<text x=\"8\" y=\"16\" font-size=\"12\" fill=\"#333333\">gap lengths</text>\n";
    out << "<text x=\"8\" y=\"214\" font-size=\"12\" fill=\"#333333\">derivative of generator 1</text>\n";
    out << "</svg>\n";
    (void)height;
    return out.str();
}

}  // namespace denjoy
