# Adaptive-submodular cover analysis - Tests Package
