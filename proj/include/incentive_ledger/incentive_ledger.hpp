#pragma once

#include "access.hpp"
#include "agents.hpp"
#include "chain.hpp"
#include "dataset.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "registry.hpp"
#include "reporting.hpp"
#include "token.hpp"
#include "wei.hpp"
