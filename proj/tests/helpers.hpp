#pragma once

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ecr/scenario.hpp"

namespace ecr::testing {

/// Two ports A and B joined by one shuttle route (A on day 0, B on day `leg`).
inline std::string shuttle_text(int days, int cap, int stock_a, int stock_b, int cycle = 4,
                                int leg = 2, double rate_ab = 0, double rate_ba = 0,
                                int vessels = 1, int t_ret = 1) {
  std::ostringstream s;
  s << "[general]\nepisode_days " << days << "\nt_ret " << t_ret << "\nvessel_capacity " << cap
    << "\nquantity_dispersion 0.5\n"
    << "[ports]\nA Alpha " << stock_a << "\nB Beta " << stock_b << '\n'
    << "[routes]\nR " << cycle << ' ' << vessels << " A:0 B:" << leg << '\n'
    << "[demand]\n";
  if (rate_ab > 0) s << "A B " << rate_ab << '\n';
  if (rate_ba > 0) s << "B A " << rate_ba << '\n';
  return s.str();
}

/// Three ports on two routes that meet at the transfer terminal T.
inline std::string two_route_text(int days, int cap) {
  std::ostringstream s;
  s << "[general]\nepisode_days " << days << "\nt_ret 1\nvessel_capacity " << cap
    << "\nquantity_dispersion 0.4\n"
    << "[ports]\nX Xland 30\nT Transfer 40\nY Yland 30\n"
    << "[routes]\nRX 6 2 X:0 T:3\nRY 8 2 T:0 Y:4\n"
    << "[demand]\nX T 3\nT X 2\nT Y 4\nY T 1\n";
  return s.str();
}

inline std::shared_ptr<const World> world_from(const std::string& text) {
  return make_world(parse_scenario(text));
}

inline std::shared_ptr<const World> builtin_world() { return make_world(builtin_scenario()); }

}  // namespace ecr::testing
