#pragma once

namespace rcc {

// Regularized incomplete gamma and beta, implemented via the usual series /
// continued-fraction split with a 1e-10 accuracy target. These back the
// chi-square and F tail probabilities; tests check them against numeric
// integration of the densities.

// P(a,x) = gamma(a,x)/Gamma(a), lower regularized
double reg_gamma_lower(double a, double x);
// Q(a,x) = 1 - P(a,x)
double reg_gamma_upper(double a, double x);

// I_x(a,b), regularized incomplete beta
double reg_beta(double a, double b, double x);

// survival functions
double chi2_sf(double x, double df);
double f_sf(double x, double df1, double df2);
double normal_sf(double z);

}  // namespace rcc
