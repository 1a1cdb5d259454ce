score = 0.5
print(score)
