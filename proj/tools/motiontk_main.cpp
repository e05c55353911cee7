#include "motiontk/pipeline.hpp"

int main(int argc, char** argv) { return mtk::run_cli(argc, argv); }
