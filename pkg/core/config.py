import os
from dotenv import load_dotenv

# Load environment variables from project root .env file
# override=True ensures .env file values take precedence over system environment variables
load_dotenv(dotenv_path=os.path.join(os.path.dirname(os.path.dirname(__file__)), ".env"), override=True)

# Enumeration limits
GLW_CAP = int(os.getenv("GLW_CAP", "4096"))  # Max vectors/morphisms enumerated in one fiber or Hom space
GLW_LATTICE_CAP = int(os.getenv("GLW_LATTICE_CAP", "64"))  # Max ideals per lattice
GLW_CENSUS_BUDGET = int(os.getenv("GLW_CENSUS_BUDGET", "200000"))  # Backtracking nodes in the filter census

# Defaults
GLW_PRIME = int(os.getenv("GLW_PRIME", "2"))  # Used when a .gcat file has no field line
GLW_SEED = int(os.getenv("GLW_SEED", "0"))
GLW_LOG_LEVEL = os.getenv("GLW_LOG_LEVEL", "WARNING")
