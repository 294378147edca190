#pragma once

#define QMI_VERSION "0.1.0"
