#ifndef QGRAM_QGRAM_HPP
#define QGRAM_QGRAM_HPP

// Umbrella header: the whole library in dependency order.

#include "qgram/version.hpp"
#include "qgram/word.hpp"
#include "qgram/rules.hpp"
#include "qgram/sparse.hpp"
#include "qgram/hamiltonian.hpp"
#include "qgram/linalg.hpp"
#include "qgram/evolution.hpp"
#include "qgram/thermal.hpp"
#include "qgram/cluster.hpp"
#include "qgram/renorm.hpp"
#include "qgram/sectors.hpp"
#include "qgram/derivation.hpp"
#include "qgram/spin_graph.hpp"
#include "qgram/meanfield.hpp"
#include "qgram/rotation.hpp"
#include "qgram/io.hpp"

#endif
