"""Ring chain graphs, transition matrices and geometry conversion"""
