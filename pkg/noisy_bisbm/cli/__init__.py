from .main import run, main, build_parser
from .config import RunConfig
from .io import read_matrix, write_matrix
