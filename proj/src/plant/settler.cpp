#include "plant/settler.hpp"

#include <cmath>
#include <string>

#include "common/error.hpp"

namespace n2olab::plant {

SplitResult settler_split(const Stream& feed, double Qu, const ClarifierSpec& spec) {
  if (!(feed.Q >= 0.0) || !(Qu >= 0.0)) fail(ErrorKind::Parameter, "settler_split: flows must be >= 0");
  if (!(spec.capture >= 0.0 && spec.capture <= 1.0))
    fail(ErrorKind::Configuration, "settler_split: capture must lie in [0, 1]");
  if (Qu > feed.Q)
    fail(ErrorKind::Configuration, "settler_split: underflow " + std::to_string(Qu) + " m3/d exceeds feed " +
                                       std::to_string(feed.Q) + " m3/d");
  const double Qe = feed.Q - Qu;
  SplitResult out;
  out.overflow.Q = Qe;
  out.underflow.Q = Qu;
  for (std::size_t i = 0; i < bio::kNumComponents; ++i) {
    const double m = feed.load(i);
    double m_under;
    if (bio::is_particulate(i)) {
      m_under = spec.capture * m;
      if (m_under > 0.0 && Qu == 0.0)
        fail(ErrorKind::Configuration, "settler_split: solids captured but no underflow to carry them");
      // Without overflow everything leaves with the underflow.
      if (Qe == 0.0) m_under = m;
    } else {
      m_under = feed.Q > 0.0 ? m * (Qu / feed.Q) : 0.0;
    }
    const double m_over = m - m_under;
    out.underflow.c[i] = Qu > 0.0 ? m_under / Qu : 0.0;
    out.overflow.c[i] = Qe > 0.0 ? m_over / Qe : 0.0;
  }
  return out;
}

}  // namespace n2olab::plant
