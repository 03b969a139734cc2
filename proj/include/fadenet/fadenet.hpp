#pragma once

#include "fadenet/attractor.hpp"
#include "fadenet/config.hpp"
#include "fadenet/dynamics.hpp"
#include "fadenet/io.hpp"
#include "fadenet/measures.hpp"
#include "fadenet/model.hpp"
#include "fadenet/phase_space.hpp"
#include "fadenet/set_valued.hpp"
