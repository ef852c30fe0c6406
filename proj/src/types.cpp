#include "cobase/types.hpp"

#include <cstdio>
#include <cstdlib>

namespace cobase {

std::string variable_name(Variable v) {
  switch (v) {
    case Variable::T2m: return "T2m";
    case Variable::DPT: return "DPT";
  }
  throw InternalError("variable_name: bad enum value");
}

Variable parse_variable(const std::string& name) {
  if (name == "T2m") return Variable::T2m;
  if (name == "DPT") return Variable::DPT;
  throw DataError("unknown variable '" + name + "' (expected T2m or DPT)");
}

// Howard Hinnant's civil-date algorithms, epoch 1970-01-01.
int serial_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_serial(int serial, int& y, int& m, int& d) {
  int z = serial + 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y += m <= 2;
}

int parse_iso_date(const std::string& iso) {
  int y = 0, m = 0, d = 0;
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' ||
      std::sscanf(iso.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
    throw DataError("bad date '" + iso + "' (expected YYYY-MM-DD)");
  if (m < 1 || m > 12 || d < 1 || d > 31)
    throw DataError("bad date '" + iso + "' (month or day out of range)");
  const int s = serial_from_civil(y, m, d);
  if (iso_date(s) != iso)
    throw DataError("bad date '" + iso + "' (not a calendar day)");
  return s;
}

std::string iso_date(int serial) {
  int y, m, d;
  civil_from_serial(serial, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

static bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int day_of_year_365(int serial) {
  int y, m, d;
  civil_from_serial(serial, y, m, d);
  int doy = serial - serial_from_civil(y, 1, 1) + 1;  // 1..366
  if (is_leap(y)) {
    if (m == 2 && d == 29) return 365;
    if (doy > 60) --doy;
  }
  return doy;
}

int doy_circular_distance(int a, int b) {
  int diff = day_of_year_365(a) - day_of_year_365(b);
  if (diff < 0) diff = -diff;
  return diff <= 365 - diff ? diff : 365 - diff;
}

}  // namespace cobase
