# oddforms: even/odd exterior calculus and variational electrodynamics
__version__ = "1.0.0"
