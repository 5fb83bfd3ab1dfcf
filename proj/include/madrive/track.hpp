#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "madrive/geom.hpp"

namespace madrive {

struct Waypoint {
  Vec2 position;
  int lane_id = 0;  // 0 = inner, 1 = outer
  int index = 0;    // ordinal along the ring
};

struct LaneProjection {
  Vec2 nearest_point;
  double lateral_offset = 0.0;  // signed, positive = left of travel direction
  double tangent_angle = 0.0;   // (-pi, pi]
  double arc_position = 0.0;    // meters along the ring
};

// Closed waypoint ring with cumulative arc lengths. Immutable once built.
class Ring {
 public:
  explicit Ring(std::vector<Vec2> points, int lane_id);

  int size() const { return static_cast<int>(points_.size()); }
  const Vec2& point(int i) const { return points_[static_cast<size_t>(i)]; }
  const std::vector<Vec2>& points() const { return points_; }
  int lane_id() const { return lane_id_; }
  double length() const { return total_length_; }

  LaneProjection project(const Vec2& query) const;
  Vec2 point_at_arc(double arc) const;  // arc wrapped into [0, length)
  // travel direction of the segment leaving waypoint i
  double tangent_at_waypoint(int i) const;

 private:
  std::vector<Vec2> points_;
  std::vector<double> cum_length_;  // cum_length_[i] = arc position of points_[i]
  double total_length_ = 0.0;
  int lane_id_ = 0;
};

struct TrackError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class TrackMap {
 public:
  TrackMap(std::vector<Vec2> inner, std::vector<Vec2> outer, double spacing,
           double lane_width, double track_half_width);

  const Ring& lane(int lane_id) const { return lane_id == 0 ? inner_ : outer_; }
  double lane_width() const { return lane_width_; }
  double track_half_width() const { return track_half_width_; }
  double spacing() const { return spacing_; }

 private:
  Ring inner_;
  Ring outer_;
  double spacing_;
  double lane_width_;
  double track_half_width_;
};

LaneProjection project(const TrackMap& track, int lane_id, const Vec2& point);
Vec2 goal_point(const TrackMap& track, int lane_id, const LaneProjection& proj,
                double lookahead);
bool is_off_track(const TrackMap& track, const Vec2& point);

// Built-in rounded-rectangle loop: two concentric lane centerlines, outer ring
// circumference ~7 m, separated radially by lane_width.
TrackMap default_track();

TrackMap load_track(const std::string& path);
void save_track(const TrackMap& track, const std::string& path);

}  // namespace madrive
