#include "dtnname/geo.hpp"

#include "dtnname/text.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace dtnname {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept
{
  const double lat1 = a.latitude() * kDegToRad;
  const double lat2 = b.latitude() * kDegToRad;
  const double sin_dlat = std::sin((lat2 - lat1) / 2.0);
  const double sin_dlon = std::sin((b.longitude() - a.longitude()) * kDegToRad / 2.0);
  double h = sin_dlat * sin_dlat + std::cos(lat1) * std::cos(lat2) * sin_dlon * sin_dlon;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

}  // namespace

GeoPoint::GeoPoint(double longitude, double latitude) : longitude_(longitude), latitude_(latitude)
{
  if (!std::isfinite(longitude) || longitude < -180.0 || longitude > 180.0) {
    throw GeoError("longitude out of range [-180, 180]: " + format_number(longitude));
  }
  if (!std::isfinite(latitude) || latitude < -90.0 || latitude > 90.0) {
    throw GeoError("latitude out of range [-90, 90]: " + format_number(latitude));
  }
}

WithinPredicate::WithinPredicate(GeoPoint center, double radius_km) : center_(center), radius_km_(radius_km)
{
  if (!std::isfinite(radius_km) || radius_km <= 0.0) {
    throw GeoError("radius must be positive and finite: " + format_number(radius_km));
  }
}

double distance_km(const GeoPoint& a, const GeoPoint& b) noexcept
{
  // Evaluate in a fixed argument order so d(a,b) and d(b,a) are bit-identical.
  auto key = [](const GeoPoint& p) { return std::pair(p.longitude(), p.latitude()); };
  return key(a) <= key(b) ? haversine_km(a, b) : haversine_km(b, a);
}

bool within(const GeoPoint& p, const WithinPredicate& pred) noexcept
{
  return distance_km(p, pred.center()) <= pred.radius_km();
}

std::string to_string(const GeoPoint& p)
{
  return format_number(p.longitude()) + " " + format_number(p.latitude());
}

}  // namespace dtnname
