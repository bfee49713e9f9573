# Adaptive-submodular cover analysis - Source Package
