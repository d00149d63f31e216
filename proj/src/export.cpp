#include "sstex/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sstex/error.hpp"

namespace sstex {

namespace {

std::string num(double v, const char* fmt = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExportError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ExportError("write failed for '" + path.string() + "'");
}

}  // namespace

std::string curve_csv(const LearningCurve& curve) {
  std::size_t reps = 0;
  for (const auto& e : curve.errors) reps = std::max(reps, e.size());
  std::string s = "size,mean_error,std_error";
  for (std::size_t r = 0; r < reps; ++r) s += ",rep_" + std::to_string(r + 1);
  s += '\n';
  for (std::size_t i = 0; i < curve.sizes.size(); ++i) {
    s += std::to_string(curve.sizes[i]) + ',' + num(curve.mean(i)) + ',' + num(curve.std_dev(i));
    for (double e : curve.errors[i]) s += ',' + num(e);
    s += '\n';
  }
  return s;
}

void write_curve_csv(const std::filesystem::path& path, const LearningCurve& curve) {
  write_text(path, curve_csv(curve));
}

LearningCurve read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot read '" + path.string() + "'");
  LearningCurve curve;
  curve.name = path.stem().string();
  std::string line;
  if (!std::getline(in, line) || line.rfind("size,mean_error,std_error", 0) != 0)
    throw IngestionError("'" + path.string() + "' is not a learning-curve file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 3) throw IngestionError("'" + path.string() + "': short row");
    try {
      curve.sizes.push_back(std::stoi(cells[0]));
      std::vector<double> reps;
      for (std::size_t i = 3; i < cells.size(); ++i) reps.push_back(std::stod(cells[i]));
      if (reps.empty()) reps.push_back(std::stod(cells[1]));
      curve.errors.push_back(std::move(reps));
    } catch (const std::logic_error&) {
      throw IngestionError("'" + path.string() + "': malformed number");
    }
  }
  return curve;
}

std::string render_svg(const std::vector<LearningCurve>& curves, const std::string& title) {
  constexpr double W = 760, H = 480, left = 70, right = 200, top = 40, bottom = 60;
  const double pw = W - left - right;
  const double ph = H - top - bottom;

  int lo = 0, hi = 0;
  double emax = 0.0;
  bool first = true;
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.sizes.size(); ++i) {
      lo = first ? c.sizes[i] : std::min(lo, c.sizes[i]);
      hi = first ? c.sizes[i] : std::max(hi, c.sizes[i]);
      first = false;
      for (double e : c.errors[i]) emax = std::max(emax, e);
    }
  const double xl = std::log(std::max(lo, 1));
  const double xh = std::log(std::max(hi, 1));
  const double ymax = emax > 0.0 ? emax : 1.0;
  const auto px = [&](double size) {
    return xh > xl ? left + pw * (std::log(size) - xl) / (xh - xl) : left + pw / 2;
  };
  const auto py = [&](double err) { return top + ph * (1.0 - err / ymax); };

  static const char* palette[] = {"#000000", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#444\"/>\n";

  // Size ticks at every distinct size, error ticks at fifths of the range.
  std::vector<int> ticks;
  for (const auto& c : curves) ticks.insert(ticks.end(), c.sizes.begin(), c.sizes.end());
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
  for (int t : ticks) {
    const double x = px(t);
    o << "<line x1=\"" << num(x, "%.2f") << "\" y1=\"" << top + ph << "\" x2=\"" << num(x, "%.2f") << "\" y2=\""
      << top + ph + 5 << "\" stroke=\"#444\"/>\n";
    o << "<text x=\"" << num(x, "%.2f") << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << t
      << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double e = ymax * i / 5.0;
    const double y = py(e);
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << num(y, "%.2f") << "\" x2=\"" << left << "\" y2=\""
      << num(y, "%.2f") << "\" stroke=\"#444\"/>\n";
    o << "<text x=\"" << left - 8 << "\" y=\"" << num(y + 4, "%.2f") << "\" text-anchor=\"end\">"
      << num(e, "%.3f") << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 18
    << "\" text-anchor=\"middle\">training set size per class (log scale)</text>\n";
  o << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << top + ph / 2 << ")\">classification error</text>\n";

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    const char* color = palette[k % (sizeof palette / sizeof *palette)];
    const double width = k == 0 ? 3.0 : 1.0;
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\" points=\"";
    for (std::size_t i = 0; i < c.sizes.size(); ++i)
      o << (i ? " " : "") << num(px(c.sizes[i]), "%.2f") << ',' << num(py(c.mean(i)), "%.2f");
    o << "\"/>\n";
    const double ly = top + 12 + 14.0 * static_cast<double>(k);
    o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"" << width << "\"/>\n";
    o << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\">" << c.name << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<std::filesystem::path> export_results(const std::vector<LearningCurve>& curves,
                                                  const std::filesystem::path& out_dir, const std::string& title) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ExportError("cannot create '" + out_dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& c : curves) {
    written.push_back(out_dir / (c.name + ".csv"));
    write_curve_csv(written.back(), c);
  }
  written.push_back(out_dir / "chart.svg");
  write_text(written.back(), render_svg(curves, title));
  return written;
}

std::vector<std::filesystem::path> export_results(const CurveSet& set, const std::filesystem::path& out_dir,
                                                  const std::string& title) {
  std::vector<LearningCurve> all{set.combined};
  all.insert(all.end(), set.classifiers.begin(), set.classifiers.end());
  all.insert(all.end(), set.groups.begin(), set.groups.end());
  return export_results(all, out_dir, title);
}

}  // namespace sstex
