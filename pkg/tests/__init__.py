# Convex MDP solver tests
