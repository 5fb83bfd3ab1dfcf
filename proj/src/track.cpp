#include "madrive/track.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace madrive {

Ring::Ring(std::vector<Vec2> points, int lane_id)
    : points_(std::move(points)), lane_id_(lane_id) {
  if (points_.size() < 8) {
    throw TrackError("ring needs at least 8 waypoints");
  }
  const int n = static_cast<int>(points_.size());
  cum_length_.resize(points_.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    cum_length_[static_cast<size_t>(i)] = acc;
    const Vec2& a = points_[static_cast<size_t>(i)];
    const Vec2& b = points_[static_cast<size_t>((i + 1) % n)];
    const double seg = distance(a, b);
    if (!(seg > 0.0) || seg > 0.2) {
      throw TrackError("waypoint spacing out of range (0, 0.2] m at index " +
                       std::to_string(i));
    }
    acc += seg;
  }
  total_length_ = acc;
}

LaneProjection Ring::project(const Vec2& query) const {
  const int n = size();
  double best_dist_sq = std::numeric_limits<double>::infinity();
  int best_seg = 0;
  double best_t = 0.0;
  Vec2 best_point;
  for (int i = 0; i < n; ++i) {
    const Vec2& a = points_[static_cast<size_t>(i)];
    const Vec2& b = points_[static_cast<size_t>((i + 1) % n)];
    const Vec2 ab = b - a;
    double t = (query - a).dot(ab) / ab.norm_sq();
    t = clamp(t, 0.0, 1.0);
    const Vec2 p = a + ab * t;
    const double d = (query - p).norm_sq();
    if (d < best_dist_sq) {
      best_dist_sq = d;
      best_seg = i;
      best_t = t;
      best_point = p;
    }
  }
  const Vec2& a = points_[static_cast<size_t>(best_seg)];
  const Vec2& b = points_[static_cast<size_t>((best_seg + 1) % n)];
  const Vec2 dir = b - a;
  const double seg_len = dir.norm();

  LaneProjection proj;
  proj.nearest_point = best_point;
  proj.tangent_angle = wrap_angle(std::atan2(dir.y, dir.x));
  proj.arc_position = cum_length_[static_cast<size_t>(best_seg)] + best_t * seg_len;
  const Vec2 offset = query - best_point;
  const double dist = offset.norm();
  proj.lateral_offset = dir.cross(offset) >= 0.0 ? dist : -dist;
  return proj;
}

Vec2 Ring::point_at_arc(double arc) const {
  arc = std::fmod(arc, total_length_);
  if (arc < 0.0) arc += total_length_;
  // cum_length_ is sorted; find the segment containing arc
  auto it = std::upper_bound(cum_length_.begin(), cum_length_.end(), arc);
  const int seg = static_cast<int>(it - cum_length_.begin()) - 1;
  const int n = size();
  const Vec2& a = points_[static_cast<size_t>(seg)];
  const Vec2& b = points_[static_cast<size_t>((seg + 1) % n)];
  const double seg_len = distance(a, b);
  const double t = (arc - cum_length_[static_cast<size_t>(seg)]) / seg_len;
  return a + (b - a) * t;
}

double Ring::tangent_at_waypoint(int i) const {
  const int n = size();
  const Vec2& a = points_[static_cast<size_t>(i % n)];
  const Vec2& b = points_[static_cast<size_t>((i + 1) % n)];
  const Vec2 dir = b - a;
  return wrap_angle(std::atan2(dir.y, dir.x));
}

TrackMap::TrackMap(std::vector<Vec2> inner, std::vector<Vec2> outer,
                   double spacing, double lane_width, double track_half_width)
    : inner_(std::move(inner), 0),
      outer_(std::move(outer), 1),
      spacing_(spacing),
      lane_width_(lane_width),
      track_half_width_(track_half_width) {
  if (!(lane_width_ > 0.0)) throw TrackError("lane_width must be positive");
  if (track_half_width_ < lane_width_ / 2.0) {
    throw TrackError("track_half_width must be >= lane_width / 2");
  }
  if (!(inner_.length() < outer_.length())) {
    throw TrackError("inner ring must be shorter than outer ring");
  }
}

LaneProjection project(const TrackMap& track, int lane_id, const Vec2& point) {
  return track.lane(lane_id).project(point);
}

Vec2 goal_point(const TrackMap& track, int lane_id, const LaneProjection& proj,
                double lookahead) {
  return track.lane(lane_id).point_at_arc(proj.arc_position + lookahead);
}

bool is_off_track(const TrackMap& track, const Vec2& point) {
  const double d0 = std::abs(track.lane(0).project(point).lateral_offset);
  const double d1 = std::abs(track.lane(1).project(point).lateral_offset);
  return std::min(d0, d1) > track.track_half_width();
}

namespace {

// rounded rectangle centerline: rectangle of half extents (hx, hy) grown by
// corner radius r, sampled counterclockwise at arc steps <= spacing
std::vector<Vec2> rounded_rect_ring(double hx, double hy, double r,
                                    double spacing) {
  const double perimeter = 4.0 * hx + 4.0 * hy + 2.0 * kPi * r;
  const int n = static_cast<int>(std::ceil(perimeter / spacing));
  std::vector<Vec2> pts;
  pts.reserve(static_cast<size_t>(n));
  const double quarter_arc = 0.5 * kPi * r;
  for (int i = 0; i < n; ++i) {
    double s = perimeter * static_cast<double>(i) / static_cast<double>(n);
    Vec2 p;
    if (s < 2.0 * hx) {  // bottom straight, left to right
      p = {-hx + s, -hy - r};
    } else if ((s -= 2.0 * hx) < quarter_arc) {  // bottom-right corner
      const double a = -0.5 * kPi + s / r;
      p = {hx + r * std::cos(a), -hy + r * std::sin(a)};
    } else if ((s -= quarter_arc) < 2.0 * hy) {  // right straight, up
      p = {hx + r, -hy + s};
    } else if ((s -= 2.0 * hy) < quarter_arc) {  // top-right corner
      const double a = s / r;
      p = {hx + r * std::cos(a), hy + r * std::sin(a)};
    } else if ((s -= quarter_arc) < 2.0 * hx) {  // top straight, right to left
      p = {hx - s, hy + r};
    } else if ((s -= 2.0 * hx) < quarter_arc) {  // top-left corner
      const double a = 0.5 * kPi + s / r;
      p = {-hx + r * std::cos(a), hy + r * std::sin(a)};
    } else if ((s -= quarter_arc) < 2.0 * hy) {  // left straight, down
      p = {-hx - r, hy - s};
    } else {  // bottom-left corner
      s -= 2.0 * hy;
      const double a = kPi + s / r;
      p = {-hx + r * std::cos(a), -hy + r * std::sin(a)};
    }
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

TrackMap default_track() {
  const double hx = 0.75;
  const double hy = 0.40;
  const double lane_width = 0.22;
  const double outer_r = 0.36;
  const double inner_r = outer_r - lane_width;
  const double spacing = 0.1;
  return TrackMap(rounded_rect_ring(hx, hy, inner_r, spacing),
                  rounded_rect_ring(hx, hy, outer_r, spacing), spacing,
                  lane_width, 0.22);
}

TrackMap load_track(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TrackError("cannot open track file: " + path);
  std::string line;
  int line_no = 0;

  if (!std::getline(in, line)) throw TrackError("empty track file: " + path);
  ++line_no;
  std::istringstream header(line);
  std::string k_lanes, k_spacing, k_width, k_half;
  int n_lanes = 0;
  double spacing = 0.0, width = 0.0, half_width = 0.0;
  header >> k_lanes >> n_lanes >> k_spacing >> spacing >> k_width >> width >>
      k_half >> half_width;
  if (!header || k_lanes != "lanes" || k_spacing != "spacing" ||
      k_width != "width" || k_half != "half_width") {
    throw TrackError(path + ":1: malformed header");
  }
  if (n_lanes != 2) throw TrackError(path + ":1: expected 2 lanes");

  std::vector<Vec2> rings[2];
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    int lane_id;
    double x, y;
    if (!(row >> lane_id >> x >> y) || (lane_id != 0 && lane_id != 1)) {
      throw TrackError(path + ":" + std::to_string(line_no) +
                       ": malformed waypoint line");
    }
    rings[lane_id].push_back({x, y});
  }
  return TrackMap(std::move(rings[0]), std::move(rings[1]), spacing, width,
                  half_width);
}

void save_track(const TrackMap& track, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw TrackError("cannot write track file: " + path);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "lanes 2 spacing %.9g width %.9g half_width %.9g",
                track.spacing(), track.lane_width(), track.track_half_width());
  out << buf << "\n";
  for (int lane = 0; lane < 2; ++lane) {
    const Ring& ring = track.lane(lane);
    for (int i = 0; i < ring.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%d %.9g %.9g", lane, ring.point(i).x,
                    ring.point(i).y);
      out << buf << "\n";
    }
  }
  if (!out) throw TrackError("write failed: " + path);
}

}  // namespace madrive
