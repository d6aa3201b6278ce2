#pragma once

#include "affine_model.hpp"
#include "eigensolve.hpp"
#include "gap_cert.hpp"
#include "generators.hpp"
#include "greedy.hpp"
#include "lowerbounds.hpp"
#include "lp.hpp"
#include "model_io.hpp"
#include "parallel.hpp"
#include "rom_io.hpp"
#include "subspace.hpp"
