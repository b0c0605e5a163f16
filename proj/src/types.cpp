#include "dragobs/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dragobs {

bool TruthState::finite() const {
  return std::isfinite(u) && std::isfinite(v) && std::isfinite(w) &&
         eta.allFinite();
}

double TruthState::pitch() const {
  const double s = std::clamp(-eta.x(), -1.0, 1.0);
  return std::asin(s);
}

bool ObserverState::finite() const {
  return std::isfinite(u_hat) && std::isfinite(v_hat) && eta_hat.allFinite();
}

std::string GainValidation::describe() const {
  if (ok) return "ok";
  std::ostringstream os;
  for (size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].condition << " (slack " << violations[i].slack << ")";
  }
  return os.str();
}

GainValidation validate_gains(const Gains& g) {
  GainValidation rep;
  auto require = [&rep](bool holds, const std::string& cond, double slack) {
    if (!holds) {
      rep.ok = false;
      rep.violations.push_back({cond, slack});
    }
  };

  const double fields[] = {g.k1, g.k2, g.k3,  g.ku, g.kv,
                           g.epsilon, g.c_l, g.c_u, g.g};
  for (double f : fields) {
    if (!std::isfinite(f)) {
      rep.ok = false;
      rep.violations.push_back({"all fields finite", f});
      return rep;
    }
  }

  require(g.g > 0.0, "g > 0", g.g);
  require(g.epsilon > 0.0, "epsilon > 0", g.epsilon);
  require(g.epsilon < 1.0, "epsilon < 1", 1.0 - g.epsilon);
  require(g.c_l > 0.0, "c_l > 0", g.c_l);
  require(g.c_u >= g.c_l, "c_l <= c_u", g.c_u - g.c_l);

  require(g.k3 > 0.0, "k3 > 0", g.k3);

  if (g.epsilon > 0.0 && g.g > 0.0) {
    const double eps2 = g.epsilon * g.epsilon;
    const double k12_threshold = 1.0 + g.k3 / (2.0 * eps2);
    require(g.k1 > k12_threshold, "k1 > 1 + k3/(2 eps^2)",
            g.k1 - k12_threshold);
    require(g.k2 > k12_threshold, "k2 > 1 + k3/(2 eps^2)",
            g.k2 - k12_threshold);

    const double g2 = g.g * g.g;
    const double ku_threshold = g.k1 * g.k1 * g.c_u * g.c_u / (2.0 * g2) + g2 / 2.0;
    const double kv_threshold = g.k2 * g.k2 * g.c_u * g.c_u / (2.0 * g2) + g2 / 2.0;
    require(g.ku > ku_threshold, "ku > k1^2 c_u^2/(2 g^2) + g^2/2",
            g.ku - ku_threshold);
    require(g.kv > kv_threshold, "kv > k2^2 c_u^2/(2 g^2) + g^2/2",
            g.kv - kv_threshold);
  }

  return rep;
}

}  // namespace dragobs
