"""Heat coefficients of the Robertson-Walker Dirac Laplacian via the residue of the torus-extended parametrix."""
from .exact import GaussianRational, SymbolExpr, d_eta, d_t, d_u

__version__ = "0.1.0"

__all__ = ["GaussianRational", "SymbolExpr", "d_u", "d_t", "d_eta", "__version__"]
