#pragma once

// Umbrella header: Dirichlet forms on finitely ramified fractal triples,
// trace renormalization, fixed-point search, and the obstruction
// certificates showing the twenty-cell ring admits no self-similar energy.

#include "fracform/version.hpp"

#include "fracform/rng.hpp"
#include "fracform/triple.hpp"

#include "fracform/form.hpp"
#include "fracform/renorm.hpp"

#include "fracform/eigenflow.hpp"
#include "fracform/io.hpp"
