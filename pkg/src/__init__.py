"""
Mass comparison on toric ALE, ALF and AF gravitational instantons
"""
