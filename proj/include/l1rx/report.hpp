#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "l1rx/config.hpp"

namespace l1rx {

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

struct Series {
    std::vector<double> x, y;
};

// minimal SVG renderer: one polyline or point cloud with autoscaled axes
inline void write_svg(const std::string& path, const Series& s,
                      const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, bool points) {
    const int w = 860, h = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!s.x.empty()) {
        xmin = *std::min_element(s.x.begin(), s.x.end());
        xmax = *std::max_element(s.x.begin(), s.x.end());
        ymin = *std::min_element(s.y.begin(), s.y.end());
        ymax = *std::max_element(s.y.begin(), s.y.end());
    }
    if (xmax == xmin)
        xmax = xmin + 1;
    if (ymax == ymin)
        ymax = ymin + 1;
    auto px = [&](double x) {
        return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr);
    };
    auto py = [&](double y) {
        return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb);
    };

    std::ofstream f(path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w
      << "' height='" << h << "'>\n";
    f << "<rect width='100%' height='100%' fill='white'/>\n";
    f << "<text x='" << w / 2 << "' y='20' text-anchor='middle' "
         "font-size='15'>"
      << title << "</text>\n";
    f << "<text x='" << w / 2 << "' y='" << h - 12
      << "' text-anchor='middle' font-size='12'>" << xlabel << "</text>\n";
    f << "<text x='16' y='" << h / 2
      << "' text-anchor='middle' font-size='12' transform='rotate(-90 16 "
      << h / 2 << ")'>" << ylabel << "</text>\n";
    f << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr
      << "' y2='" << h - mb << "' stroke='black'/>\n";
    f << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
      << h - mb << "' stroke='black'/>\n";
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.6g", xmin);
    f << "<text x='" << ml << "' y='" << h - mb + 16
      << "' font-size='11'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.6g", xmax);
    f << "<text x='" << w - mr << "' y='" << h - mb + 16
      << "' text-anchor='end' font-size='11'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.6g", ymin);
    f << "<text x='" << ml - 4 << "' y='" << h - mb
      << "' text-anchor='end' font-size='11'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.6g", ymax);
    f << "<text x='" << ml - 4 << "' y='" << mt + 4
      << "' text-anchor='end' font-size='11'>" << buf << "</text>\n";

    if (points) {
        for (std::size_t i = 0; i < s.x.size(); ++i)
            f << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i])
              << "' r='1.2' fill='steelblue'/>\n";
    } else {
        f << "<polyline fill='none' stroke='steelblue' stroke-width='1' "
             "points='";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            f << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        f << "'/>\n";
    }
    f << "</svg>\n";
}

inline void write_series_csv(const std::string& path, const Series& s,
                             const std::string& xname,
                             const std::string& yname) {
    std::ofstream f(path);
    f << xname << ',' << yname << "\n";
    char line[64];
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        std::snprintf(line, sizeof line, "%.9g,%.9g\n", s.x[i], s.y[i]);
        f << line;
    }
}

} // namespace detail

// Renders the tracking-display graphs (I-prompt, IQ constellation, Doppler
// vs time) from a run's telemetry.csv as CSV series plus SVG images. CSV
// is the contract; images are best effort.
inline void emit_plots(const std::string& run_dir,
                       std::size_t max_points = 20000) {
    namespace fs = std::filesystem;
    const auto telemetry = run_dir + "/telemetry.csv";
    if (!fs::exists(telemetry))
        return;
    std::ifstream f(telemetry);
    std::string line;
    std::getline(f, line); // header

    struct PerPrn {
        detail::Series iprompt, constellation, doppler;
    };
    std::map<int, PerPrn> channels;
    while (std::getline(f, line)) {
        const auto fields = detail::split_csv(line);
        if (fields.size() < 9)
            continue;
        const double t = std::stod(fields[0]) * 1e-3;
        const int prn = std::stoi(fields[1]);
        auto& ch = channels[prn];
        ch.iprompt.x.push_back(t);
        ch.iprompt.y.push_back(std::stod(fields[2]));
        ch.constellation.x.push_back(std::stod(fields[2]));
        ch.constellation.y.push_back(std::stod(fields[3]));
        ch.doppler.x.push_back(t);
        ch.doppler.y.push_back(std::stod(fields[4]));
    }

    const auto plot_dir = run_dir + "/plots";
    fs::create_directories(plot_dir);
    auto decimate = [&](detail::Series& s) {
        if (s.x.size() <= max_points)
            return;
        detail::Series d;
        const double step =
            static_cast<double>(s.x.size()) /
            static_cast<double>(max_points);
        for (std::size_t i = 0; i < max_points; ++i) {
            const auto k = static_cast<std::size_t>(
                static_cast<double>(i) * step);
            d.x.push_back(s.x[k]);
            d.y.push_back(s.y[k]);
        }
        s = std::move(d);
    };

    char name[128];
    for (auto& [prn, ch] : channels) {
        decimate(ch.iprompt);
        decimate(ch.constellation);
        decimate(ch.doppler);
        std::snprintf(name, sizeof name, "prn%02d", prn);
        const std::string base = plot_dir + "/" + name;
        std::string title = std::string("PRN ") + std::to_string(prn);
        detail::write_series_csv(base + "_iprompt.csv", ch.iprompt, "t_s",
                                 "ip");
        detail::write_svg(base + "_iprompt.svg", ch.iprompt,
                          title + " I-prompt", "t [s]", "I prompt", true);
        detail::write_series_csv(base + "_constellation.csv",
                                 ch.constellation, "ip", "qp");
        detail::write_svg(base + "_constellation.svg", ch.constellation,
                          title + " IQ constellation", "I", "Q", true);
        detail::write_series_csv(base + "_doppler.csv", ch.doppler, "t_s",
                                 "doppler_hz");
        detail::write_svg(base + "_doppler.svg", ch.doppler,
                          title + " Doppler", "t [s]", "Doppler [Hz]",
                          false);
    }
}

// Text rendering of a run directory: summary counters, channel table,
// fix statistics, bench rows when present.
inline std::string render_report(const std::string& run_dir) {
    namespace fs = std::filesystem;
    std::ostringstream os;
    os << "run report: " << run_dir << "\n";

    const auto summary_path = run_dir + "/summary.json";
    if (fs::exists(summary_path)) {
        const auto j = load_json_file(summary_path);
        os << "\n-- run summary --\n";
        os << "blocks produced/consumed: " << j.value("blocks_produced", 0)
           << "/" << j.value("blocks_consumed", 0) << "\n";
        os << "overflow_count: " << j.value("overflow_count", 0)
           << (j.value("degraded", false) ? "  (DEGRADED)" : "") << "\n";
        os << "rounds: " << j.value("rounds", 0)
           << "  channel-epochs: " << j.value("channel_epochs", 0) << "\n";
        os << "valid fixes: " << j.value("n_valid_fixes", 0) << " of "
           << j.value("n_fixes", 0) << "\n";
        if (j.contains("channels")) {
            os << "\nslot prn state     nav  cn0_dbhz lock_ratio epochs\n";
            char line[160];
            for (const auto& c : j["channels"]) {
                std::snprintf(line, sizeof line,
                              "%4d %3d %-9s %-4s %8.1f %10.3f %7lld\n",
                              c.value("slot", 0), c.value("prn", 0),
                              c.value("state", "?").c_str(),
                              c.value("nav_state", "?").c_str(),
                              c.value("cn0_dbhz", 0.0),
                              c.value("carrier_lock_ratio", 0.0),
                              static_cast<long long>(
                                  c.value("epochs", 0LL)));
                os << line;
            }
        }
    }

    const auto fixes_path = run_dir + "/fixes.csv";
    if (fs::exists(fixes_path)) {
        std::ifstream f(fixes_path);
        std::string line;
        std::getline(f, line);
        int n = 0, valid = 0;
        double lat = 0, lon = 0, h = 0, gdop = 0;
        while (std::getline(f, line)) {
            const auto fields = detail::split_csv(line);
            if (fields.size() < 12)
                continue;
            ++n;
            if (fields[11] == "1") {
                ++valid;
                lat += std::stod(fields[1]);
                lon += std::stod(fields[2]);
                h += std::stod(fields[3]);
                gdop += std::stod(fields[8]);
            }
        }
        os << "\n-- navigation --\n";
        os << "fix records: " << n << " (" << valid << " valid)\n";
        if (valid > 0) {
            char line2[160];
            std::snprintf(line2, sizeof line2,
                          "mean position: %.6f deg, %.6f deg, %.1f m "
                          "(mean GDOP %.2f)\n",
                          lat / valid, lon / valid, h / valid,
                          gdop / valid);
            os << line2;
        }
    }

    const auto bench_path = run_dir + "/bench.csv";
    if (fs::exists(bench_path)) {
        os << "\n-- bench --\n";
        std::ifstream f(bench_path);
        std::string line;
        while (std::getline(f, line))
            os << line << "\n";
    }
    return os.str();
}

} // namespace l1rx
