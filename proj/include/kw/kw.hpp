#ifndef KW_KW_HPP
#define KW_KW_HPP

#include "kw/error.hpp"
#include "kw/functionals.hpp"
#include "kw/graph.hpp"
#include "kw/io.hpp"
#include "kw/monotone.hpp"
#include "kw/newton.hpp"
#include "kw/oracle.hpp"
#include "kw/problem.hpp"
#include "kw/solvability.hpp"
#include "kw/solve.hpp"
#include "kw/solve_report.hpp"
#include "kw/spectral.hpp"
#include "kw/variational.hpp"

#endif  // KW_KW_HPP
