"""convex-mdp - solving convex MDPs as games between a cost player and a policy player"""
__version__ = "0.1.0"
