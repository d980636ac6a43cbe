#include "wiplus/detect/stages.hpp"

namespace wiplus::detect {

ExtractedSignal extract_spurious(const SampleWindow& window) {
  const std::size_t n = window.size();
  ExtractedSignal sig;
  sig.r.assign(n, 0.0);
  sig.covered = window.covered;

  // leads: sample i+1 has an ACK failure or starts a chain of full-TX samples ending in one.
  bool leads = false;
  for (std::size_t i = n; i-- > 0;) {
    if (!window.is_covered(i)) {
      leads = false;
      continue;
    }
    const MacSample& m = window.samples[i];
    double r = 0.0;
    if (m.s_tx == 0 && m.s_rx == 0)
      r = m.s_other;
    else if (m.s_ack_fail > 0)
      r = m.s_tx;
    else if (m.s_tx == 100 && leads)
      r = m.s_tx;
    sig.r[i] = r;
    leads = m.s_ack_fail > 0 || (m.s_tx == 100 && leads);
  }

  sig.covered_count = window.covered_count();
  for (std::size_t i = 0; i < n; ++i) sig.nonzero_count += sig.r[i] != 0.0;
  sig.nonzero_fraction =
      sig.covered_count ? static_cast<double>(sig.nonzero_count) / static_cast<double>(sig.covered_count) : 0.0;
  return sig;
}

bool density_gate(const ExtractedSignal& sig) {
  // Abort iff nonzero / covered <= 0.01, in integers to keep the boundary exact.
  return 100 * sig.nonzero_count > sig.covered_count;
}

}  // namespace wiplus::detect
