#pragma once

#include "cosmoqm/branches.hpp"
#include "cosmoqm/cosmology.hpp"
#include "cosmoqm/frequency.hpp"
#include "cosmoqm/products.hpp"
#include "cosmoqm/quantum.hpp"
#include "cosmoqm/random.hpp"
