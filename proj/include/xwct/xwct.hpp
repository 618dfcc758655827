#pragma once

#include "xwct/cube.hpp"
#include "xwct/entropy.hpp"
#include "xwct/error.hpp"
#include "xwct/fft.hpp"
#include "xwct/grid.hpp"
#include "xwct/io.hpp"
#include "xwct/pipeline.hpp"
#include "xwct/reassign.hpp"
#include "xwct/retrieve.hpp"
#include "xwct/ridge.hpp"
#include "xwct/signal.hpp"
#include "xwct/squeeze.hpp"
#include "xwct/wct.hpp"
#include "xwct/window.hpp"
#include "xwct/xray.hpp"
