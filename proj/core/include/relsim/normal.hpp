#pragma once

// Standard-normal helpers. The quantile uses Wichura's AS241 (PPND16) rational
// approximation, accurate to well below 1e-9 over the full open interval,
// which is what deep-tail reliability indices (beta ~ 5.6) require.

namespace relsim {

double std_normal_pdf(double x);
double std_normal_log_pdf(double x);

// Phi(x), computed via erfc so the lower tail keeps full relative accuracy.
double std_normal_cdf(double x);

// PhiInv(p) for p in (0,1); throws std::domain_error otherwise.
double std_normal_quantile(double p);

} // namespace relsim
