"""Integer-valued differentially private noise for count queries."""
