#pragma once

#include "spc/composer.hpp"
#include "spc/connections.hpp"
#include "spc/generator.hpp"
#include "spc/independence.hpp"
#include "spc/memory.hpp"
#include "spc/parser.hpp"
#include "spc/strand.hpp"
#include "spc/term.hpp"
