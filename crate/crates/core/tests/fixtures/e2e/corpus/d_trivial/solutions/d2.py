print('h' + 'i')
