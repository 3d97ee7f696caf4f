#include "kgeeg/montage.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include "kgeeg/error.hpp"

namespace kgeeg {

namespace {

Vec3 spherical(double theta_deg, double phi_deg) {
  const double t = theta_deg * std::numbers::pi / 180.0;
  const double p = phi_deg * std::numbers::pi / 180.0;
  return {std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
}

Vec3 slerp(const Vec3& a, const Vec3& b, double t) {
  const double dot = std::clamp(a.x * b.x + a.y * b.y + a.z * b.z, -1.0, 1.0);
  const double omega = std::acos(dot);
  if (omega < 1e-12) return a;
  const double wa = std::sin((1.0 - t) * omega) / std::sin(omega);
  const double wb = std::sin(t * omega) / std::sin(omega);
  return {wa * a.x + wb * b.x, wa * a.y + wb * b.y, wa * a.z + wb * b.z};
}

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::map<std::string, Vec3> build_standard_positions() {
  std::map<std::string, Vec3> pos;
  // Circumference through Fpz, T7/T8 and Oz; 10 % of the arc is 36 degrees.
  const std::pair<const char*, double> equator[] = {
      {"FPZ", 90},  {"FP2", 72},   {"AF8", 54},  {"F8", 36},   {"FT8", 18},
      {"T8", 0},    {"TP8", -18},  {"P8", -36},  {"PO8", -54}, {"O2", -72},
      {"OZ", -90},  {"O1", -108},  {"PO7", -126}, {"P7", -144}, {"TP7", -162},
      {"T7", 180},  {"FT7", 162},  {"F7", 144},  {"AF7", 126}, {"FP1", 108}};
  for (const auto& [name, phi] : equator) pos[name] = spherical(90.0, phi);

  pos["AFZ"] = spherical(67.5, 90);
  pos["FZ"] = spherical(45.0, 90);
  pos["FCZ"] = spherical(22.5, 90);
  pos["CZ"] = spherical(0.0, 0);
  pos["CPZ"] = spherical(22.5, -90);
  pos["PZ"] = spherical(45.0, -90);
  pos["POZ"] = spherical(67.5, -90);
  pos["T9"] = spherical(112.5, 180);
  pos["T10"] = spherical(112.5, 0);
  pos["IZ"] = spherical(112.5, -90);

  // Coronal-ish rows: left end -> midline -> right end in quarter steps.
  struct Row {
    const char* prefix;
    const char* left;
    const char* mid;
    const char* right;
  };
  const Row rows[] = {{"AF", "AF7", "AFZ", "AF8"}, {"F", "F7", "FZ", "F8"},
                      {"FC", "FT7", "FCZ", "FT8"}, {"C", "T7", "CZ", "T8"},
                      {"CP", "TP7", "CPZ", "TP8"}, {"P", "P7", "PZ", "P8"},
                      {"PO", "PO7", "POZ", "PO8"}};
  for (const auto& row : rows) {
    const Vec3 l = pos.at(row.left), m = pos.at(row.mid), r = pos.at(row.right);
    const std::string p = row.prefix;
    pos[p + "5"] = slerp(l, m, 0.25);
    pos[p + "3"] = slerp(l, m, 0.50);
    pos[p + "1"] = slerp(l, m, 0.75);
    pos[p + "2"] = slerp(m, r, 0.25);
    pos[p + "4"] = slerp(m, r, 0.50);
    pos[p + "6"] = slerp(m, r, 0.75);
  }
  return pos;
}

}  // namespace

const std::vector<std::string>& pretraining_channels() {
  static const std::vector<std::string> channels = {
      "Fp1", "F7", "F3", "Fz", "F4", "F8", "Fp2", "T3", "C3", "Cz",
      "C4",  "T4", "T5", "P3", "Pz", "P4", "T6",  "O1", "O2"};
  return channels;
}

std::string canonical_label(std::string_view label) {
  std::string s;
  for (char ch : label) {
    if (!std::isspace(static_cast<unsigned char>(ch))) {
      s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    }
  }
  while (!s.empty() && s.back() == '.') s.pop_back();
  if (s.rfind("EEG", 0) == 0 && s.size() > 3) {
    s = s.substr(3);
    while (!s.empty() && (s.front() == '-' || s.front() == '_')) s.erase(s.begin());
  }
  if (s == "T3") return "T7";
  if (s == "T4") return "T8";
  if (s == "T5") return "P7";
  if (s == "T6") return "P8";
  return s;
}

MontageTable::MontageTable(std::map<std::string, Vec3> positions) {
  for (auto& [label, p] : positions) positions_[canonical_label(label)] = p;
}

const MontageTable& MontageTable::standard() {
  static const MontageTable table(build_standard_positions());
  return table;
}

bool MontageTable::contains(std::string_view label) const {
  return positions_.contains(canonical_label(label));
}

const Vec3& MontageTable::position(std::string_view label) const {
  const auto it = positions_.find(canonical_label(label));
  if (it == positions_.end()) {
    throw MontageError("electrode '" + std::string(label) + "' is not in the montage");
  }
  return it->second;
}

Recording select_channels(const Recording& rec, const std::vector<std::string>& wanted) {
  std::vector<std::size_t> rows;
  std::vector<std::string> missing;
  for (const auto& w : wanted) {
    const std::string key = canonical_label(w);
    const auto it = std::find_if(rec.channels.begin(), rec.channels.end(),
                                 [&](const std::string& c) { return canonical_label(c) == key; });
    if (it == rec.channels.end()) {
      missing.push_back(w);
    } else {
      rows.push_back(static_cast<std::size_t>(it - rec.channels.begin()));
    }
  }
  if (!missing.empty()) throw MissingChannelError(std::move(missing));

  Recording out;
  out.channels = wanted;
  out.fs = rec.fs;
  out.n_samples = rec.n_samples;
  out.subject_id = rec.subject_id;
  out.annotations = rec.annotations;
  out.data.reserve(wanted.size() * rec.n_samples);
  for (std::size_t r : rows) {
    const auto src = rec.row(r);
    out.data.insert(out.data.end(), src.begin(), src.end());
  }
  return out;
}

MappedRecording map_channels_by_proximity(const Recording& rec,
                                          const std::vector<std::string>& target,
                                          const MontageTable& montage) {
  if (rec.channels.empty() && !target.empty()) throw MissingChannelError(target);
  std::vector<Vec3> source_pos;
  source_pos.reserve(rec.channels.size());
  for (const auto& c : rec.channels) source_pos.push_back(montage.position(c));

  MappedRecording out;
  out.recording.channels = target;
  out.recording.fs = rec.fs;
  out.recording.n_samples = rec.n_samples;
  out.recording.subject_id = rec.subject_id;
  out.recording.annotations = rec.annotations;
  out.recording.data.reserve(target.size() * rec.n_samples);

  for (const auto& t : target) {
    const Vec3& tp = montage.position(t);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    std::string best_label;
    for (std::size_t s = 0; s < rec.channels.size(); ++s) {
      const double d = distance(tp, source_pos[s]);
      const std::string label = canonical_label(rec.channels[s]);
      // distances within 1e-12 count as ties
      if (d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && label < best_label)) {
        best = s;
        best_d = d;
        best_label = label;
      }
    }
    out.mapping.push_back({t, rec.channels[best], best_d});
    const auto src = rec.row(best);
    out.recording.data.insert(out.recording.data.end(), src.begin(), src.end());
  }
  return out;
}

}  // namespace kgeeg
