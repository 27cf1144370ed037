#include "lowlight/objective.hpp"

namespace lowlight {

Var sharpening_penalty(Var x, double lambda3) { return mul(x, exp(scale(x, -lambda3))); }

}  // namespace lowlight
