"""Global numerical tolerances and size limits."""

#: identities that hold exactly in exact arithmetic
EPS_ALG = 1e-12
#: eigenvalue / root-finding results
EPS_NUM = 1e-8
#: largest admissible-word count a dense operator may be built on
DIM_CAP = 4096
#: bisection width on the inverse temperature
BETA_XTOL = 1e-10
