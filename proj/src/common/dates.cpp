#include "cbcomm/dates.hpp"

#include <cctype>

#include <fmt/format.h>

#include "cbcomm/error.hpp"

namespace cbcomm {

Date parse_date(std::string_view iso) {
  auto bad = [&] { return ParameterError(fmt::format("invalid ISO date '{}'", iso)); };
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') throw bad();
  auto digits = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(iso[i]))) throw bad();
      v = v * 10 + (iso[i] - '0');
    }
    return v;
  };
  Date d{std::chrono::year{digits(0, 4)}, std::chrono::month{static_cast<unsigned>(digits(5, 2))},
         std::chrono::day{static_cast<unsigned>(digits(8, 2))}};
  if (!d.ok()) throw bad();
  return d;
}

std::string format_date(const Date& d) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()),
                     static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
}

}  // namespace cbcomm
