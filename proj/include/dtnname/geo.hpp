#ifndef DTNNAME_GEO_HPP
#define DTNNAME_GEO_HPP

#include <stdexcept>
#include <string>

namespace dtnname {

inline constexpr double kEarthRadiusKm = 6371.0;

class GeoError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Decimal-degree position. Longitude in [-180, 180], latitude in [-90, 90].
class GeoPoint {
public:
  GeoPoint(double longitude, double latitude);

  double longitude() const noexcept { return longitude_; }
  double latitude() const noexcept { return latitude_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
  double longitude_;
  double latitude_;
};

/// The spatial scope within(x, y, distance).
class WithinPredicate {
public:
  WithinPredicate(GeoPoint center, double radius_km);

  const GeoPoint& center() const noexcept { return center_; }
  double radius_km() const noexcept { return radius_km_; }

  friend bool operator==(const WithinPredicate&, const WithinPredicate&) = default;

private:
  GeoPoint center_;
  double radius_km_;
};

/// Great-circle distance in km (haversine, spherical Earth of 6371 km).
/// Exactly symmetric in its arguments.
double distance_km(const GeoPoint& a, const GeoPoint& b) noexcept;

/// Inclusive: a point at exactly the radius is inside.
bool within(const GeoPoint& p, const WithinPredicate& pred) noexcept;

/// "lon lat" with shortest round-trip decimals.
std::string to_string(const GeoPoint& p);

}  // namespace dtnname

#endif  // DTNNAME_GEO_HPP
