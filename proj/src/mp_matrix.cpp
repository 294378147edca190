#include "qmi/mp_matrix.hpp"
