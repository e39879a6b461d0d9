#pragma once

#include "lyapinfl/error.hpp"
#include "lyapinfl/plmap.hpp"
#include "lyapinfl/bisect.hpp"
#include "lyapinfl/expsum.hpp"
#include "lyapinfl/spectrum.hpp"
#include "lyapinfl/characteristic.hpp"
#include "lyapinfl/inflect.hpp"
#include "lyapinfl/surgery.hpp"
#include "lyapinfl/io.hpp"
