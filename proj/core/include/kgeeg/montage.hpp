#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgeeg/recording.hpp"

namespace kgeeg {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// The 19 channels used for pre-training, in canonical model-input order.
const std::vector<std::string>& pretraining_channels();

// Upper-cases, strips trailing '.' (PhysioNet style "Fc5.") and maps the old
// 10-20 temporal names T3/T4/T5/T6 onto T7/T8/P7/P8.
std::string canonical_label(std::string_view label);

// Idealized 10-20/10-10 electrode positions on the unit sphere
// (x toward the right ear, y toward the nasion, z toward the vertex).
class MontageTable {
 public:
  // Embedded standard table.
  static const MontageTable& standard();

  explicit MontageTable(std::map<std::string, Vec3> positions);

  bool contains(std::string_view label) const;
  // Throws MontageError when the label is unknown.
  const Vec3& position(std::string_view label) const;
  const std::map<std::string, Vec3>& entries() const { return positions_; }

 private:
  std::map<std::string, Vec3> positions_;  // keyed by canonical label
};

// Output rows follow `wanted` exactly; labels are matched via canonical_label.
Recording select_channels(const Recording& rec, const std::vector<std::string>& wanted);

struct ChannelMapping {
  std::string target;
  std::string source;
  double distance = 0.0;

  bool operator==(const ChannelMapping&) const = default;
};

struct MappedRecording {
  Recording recording;
  std::vector<ChannelMapping> mapping;
};

// Each target channel takes the row of the nearest source electrode; ties go
// to the lexicographically smallest canonical source label.
MappedRecording map_channels_by_proximity(const Recording& rec,
                                          const std::vector<std::string>& target,
                                          const MontageTable& montage);

}  // namespace kgeeg
