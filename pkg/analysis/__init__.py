"""Sweeps, phase averaging and goal-hitting analysis"""
