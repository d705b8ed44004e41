# Exterior calculus and field theory services
